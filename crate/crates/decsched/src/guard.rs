//! Enumeration guards: size limits that keep the exhaustive oracles
//! from running away. The `DECSCHED_GUARD` environment variable
//! overrides both limits; callers can also construct an unlimited
//! guard explicitly.

/// Limits on exhaustive enumeration sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumGuard {
    /// Largest selected set the permutation oracle will enumerate
    /// (default 9, i.e. 362,880 permutations).
    pub max_permutation_nodes: usize,
    /// Largest instance the subset oracle will enumerate (default 12,
    /// i.e. 4,095 non-empty subsets).
    pub max_subset_nodes: usize,
}

impl Default for EnumGuard {
    fn default() -> Self {
        Self {
            max_permutation_nodes: 9,
            max_subset_nodes: 12,
        }
    }
}

impl EnumGuard {
    /// No limits; used behind an explicit override flag.
    pub fn unlimited() -> Self {
        Self {
            max_permutation_nodes: usize::MAX,
            max_subset_nodes: usize::MAX,
        }
    }

    /// Both limits set to `n`.
    pub fn with_limit(n: usize) -> Self {
        Self {
            max_permutation_nodes: n,
            max_subset_nodes: n,
        }
    }

    /// Guard from the `DECSCHED_GUARD` environment variable, falling
    /// back to the defaults when unset or unparsable.
    pub fn from_env() -> Self {
        match std::env::var("DECSCHED_GUARD") {
            Ok(value) => match value.trim().parse::<usize>() {
                Ok(n) => Self::with_limit(n),
                Err(_) => Self::default(),
            },
            Err(_) => Self::default(),
        }
    }

    /// Work budget for ordered-tuple enumeration (the greedy prefix
    /// search): at least the full-permutation work the guard already
    /// allows, with a floor generous enough for wide, shallow tuples.
    pub fn tuple_work_limit(&self) -> f64 {
        if self.max_permutation_nodes == usize::MAX {
            return f64::INFINITY;
        }
        let full: f64 = (1..=self.max_permutation_nodes).map(|i| i as f64).product();
        full.max(1e7)
    }
}
