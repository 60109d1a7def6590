//! Per-run seed derivation.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// The SplitMix64 output mix, a bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the run at flat position `index`. Distinct indices give distinct
/// seeds for a fixed master seed, since both steps are bijections.
pub fn run_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Mixed-radix flattening of `(policy, budget, cost, seed)` indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunIndexSpace {
    pub policies: usize,
    pub budgets: usize,
    pub costs: usize,
    pub seeds: usize,
}

impl RunIndexSpace {
    pub fn len(&self) -> usize {
        self.policies * self.budgets * self.costs * self.seeds
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self, policy: usize, budget: usize, cost: usize, seed: usize) -> u64 {
        debug_assert!(policy < self.policies && budget < self.budgets && cost < self.costs && seed < self.seeds);
        (((policy * self.budgets + budget) * self.costs + cost) * self.seeds + seed) as u64
    }
}
