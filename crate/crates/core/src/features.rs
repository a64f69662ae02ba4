//! Tile coding and state-action feature stacking.
//!
//! A [`TileCoder`] maps a continuous observation to one active tile per
//! tiling. The memory of size `hash_size` is split into one contiguous
//! partition per tiling, so the indices produced for one observation are
//! always distinct. When a tiling's grid fits its partition, tiles are laid
//! out directly and never collide; otherwise they are hashed into it. State-action features place each action in its own
//! block of `hash_size` indices, making features of different actions
//! orthogonal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("invalid tile coder: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileCoderConfig {
    pub num_tilings: usize,
    pub tiles_per_dim: Vec<usize>,
    pub hash_size: usize,
    pub bounds: Vec<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
}

impl TileCoderConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: String| Err(FeatureError::InvalidConfig(m));
        if self.num_tilings == 0 {
            return bad("num_tilings must be positive".into());
        }
        if self.hash_size < self.num_tilings {
            return bad(format!("hash_size {} < num_tilings {}", self.hash_size, self.num_tilings));
        }
        if self.tiles_per_dim.is_empty() || self.tiles_per_dim.len() != self.bounds.len() {
            return bad("tiles_per_dim and bounds must be non-empty and equal length".into());
        }
        if self.tiles_per_dim.contains(&0) {
            return bad("tiles_per_dim entries must be positive".into());
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("bounds ({lo}, {hi}) must be finite with low < high"));
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct TileCoder {
    cfg: TileCoderConfig,
    partition: usize,
    /// Row-major strides of the tile grid when it fits a partition.
    strides: Option<Vec<usize>>,
}

impl TileCoder {
    pub fn new(cfg: TileCoderConfig) -> Result<Self, FeatureError> {
        cfg.validate()?;
        let partition = cfg.hash_size / cfg.num_tilings;
        let mut strides = Vec::with_capacity(cfg.tiles_per_dim.len());
        let mut cells = Some(1usize);
        for &t in cfg.tiles_per_dim.iter().rev() {
            strides.push(cells.unwrap_or(0));
            cells = cells.and_then(|c| c.checked_mul(t));
        }
        strides.reverse();
        let strides = cells.filter(|&c| c <= partition).map(|_| strides);
        Ok(Self { cfg, partition, strides })
    }

    pub fn config(&self) -> &TileCoderConfig {
        &self.cfg
    }

    #[inline]
    pub fn num_tilings(&self) -> usize {
        self.cfg.num_tilings
    }

    #[inline]
    pub fn hash_size(&self) -> usize {
        self.cfg.hash_size
    }

    /// Active tile indices in `[0, hash_size)`, sorted ascending.
    ///
    /// Each tiling has exactly `tiles` tiles per dimension. Tiles are sized
    /// so the grid displaced by the largest offset `(n-1)/n` still ends at
    /// the upper bound: width `(hi - lo) / (tiles - (n-1)/n)`.
    ///
    /// Observations outside the bounds are clipped; a non-finite
    /// coordinate is treated as the lower bound.
    pub fn encode(&self, obs: &[f64]) -> Vec<usize> {
        assert_eq!(obs.len(), self.cfg.bounds.len(), "observation dimension mismatch");
        let n = self.cfg.num_tilings;
        let span = (n - 1) as f64 / n as f64;
        let mut scaled = Vec::with_capacity(obs.len());
        for ((&o, &(lo, hi)), &tiles) in obs.iter().zip(&self.cfg.bounds).zip(&self.cfg.tiles_per_dim) {
            let o = if o.is_finite() { o.clamp(lo, hi) } else { lo };
            scaled.push((o - lo) / (hi - lo) * (tiles as f64 - span));
        }
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let offset = k as f64 / n as f64;
            let coords = scaled
                .iter()
                .zip(&self.cfg.tiles_per_dim)
                .map(|(&s, &tiles)| ((s + offset).floor() as usize).min(tiles - 1));
            let slot = match &self.strides {
                Some(strides) => coords.zip(strides).map(|(c, st)| c * st).sum(),
                None => {
                    let h = coords.fold(mix64(self.cfg.seed ^ mix64(k as u64)), |h, c| mix64(h ^ c as u64));
                    (h % self.partition as u64) as usize
                }
            };
            out.push(k * self.partition + slot);
        }
        out
    }

    /// Whether every tile has a dedicated index (no hash collisions).
    pub fn is_collision_free(&self) -> bool {
        self.strides.is_some()
    }
}

/// `tile_code` as a free function over a config.
pub fn tile_code(obs: &[f64], cfg: &TileCoderConfig) -> Result<Vec<usize>, FeatureError> {
    Ok(TileCoder::new(cfg.clone())?.encode(obs))
}

/// Binary feature vector given by its active indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseFeatures {
    dim: usize,
    active: Vec<usize>,
}

impl SparseFeatures {
    /// Sorts and deduplicates `active`.
    ///
    /// # Panics
    /// If an index is `>= dim`.
    pub fn new(dim: usize, mut active: Vec<usize>) -> Self {
        active.sort_unstable();
        active.dedup();
        assert!(active.last().is_none_or(|&i| i < dim), "feature index out of range");
        Self { dim, active }
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, active: Vec::new() }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// `||x||^2`, the number of active indices.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.active.len() as f64
    }

    #[inline]
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.active.iter().map(|&i| w[i]).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.active.iter().for_each(|&i| v[i] = 1.0);
        v
    }
}

/// Offsets state indices into the block of `action`.
///
/// # Panics
/// If `action >= num_actions` or an index is `>= hash_size`.
pub fn state_action_features(indices: &[usize], action: usize, num_actions: usize, hash_size: usize) -> SparseFeatures {
    assert!(action < num_actions, "action {action} out of range for {num_actions} actions");
    assert!(indices.iter().all(|&i| i < hash_size), "state index out of range");
    let off = action * hash_size;
    SparseFeatures::new(hash_size * num_actions, indices.iter().map(|&i| i + off).collect())
}

/// Observation-to-features mapping used by the agents.
#[derive(Debug, Clone)]
pub enum FeatureMap {
    Tiled { coder: TileCoder, num_actions: usize },
    /// One indicator per (state, action); the observation's first entry is the state index.
    Tabular { num_states: usize, num_actions: usize },
}

impl FeatureMap {
    pub fn tiled(cfg: TileCoderConfig, num_actions: usize) -> Result<Self, FeatureError> {
        Ok(Self::Tiled { coder: TileCoder::new(cfg)?, num_actions })
    }

    pub fn tabular(num_states: usize, num_actions: usize) -> Self {
        Self::Tabular { num_states, num_actions }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            Self::Tiled { num_actions, .. } | Self::Tabular { num_actions, .. } => *num_actions,
        }
    }

    /// Size of one action block.
    pub fn block_size(&self) -> usize {
        match self {
            Self::Tiled { coder, .. } => coder.hash_size(),
            Self::Tabular { num_states, .. } => *num_states,
        }
    }

    pub fn dim(&self) -> usize {
        self.block_size() * self.num_actions()
    }

    /// Active indices per action (the squared norm of every feature vector).
    pub fn active_count(&self) -> usize {
        match self {
            Self::Tiled { coder, .. } => coder.num_tilings(),
            Self::Tabular { .. } => 1,
        }
    }

    /// State-level indices in `[0, block_size)`.
    pub fn state_indices(&self, obs: &[f64]) -> Vec<usize> {
        match self {
            Self::Tiled { coder, .. } => coder.encode(obs),
            Self::Tabular { num_states, .. } => {
                let s = obs.first().copied().unwrap_or(0.0);
                let s = if s.is_finite() { s.round().clamp(0.0, (*num_states - 1) as f64) } else { 0.0 };
                vec![s as usize]
            }
        }
    }

    pub fn features(&self, obs: &[f64], action: usize) -> SparseFeatures {
        state_action_features(&self.state_indices(obs), action, self.num_actions(), self.block_size())
    }

    /// Features of every action at `obs`, indexed by action.
    pub fn all_actions(&self, obs: &[f64]) -> Vec<SparseFeatures> {
        let idx = self.state_indices(obs);
        (0..self.num_actions())
            .map(|a| state_action_features(&idx, a, self.num_actions(), self.block_size()))
            .collect()
    }
}
