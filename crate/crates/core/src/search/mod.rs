//! Localized patch search.
//!
//! Patches are compared on their DC-removed content plus a penalty on how far
//! apart they are in the (normalized) image plane:
//!
//! ```text
//! D(p, q)² = ||ac_p - ac_q||² + λ ||loc_p - loc_q||²
//! ```
//!
//! This is plain Euclidean distance once every patch is embedded as
//! `[ac..., √λ·x, √λ·y]`, which lets a k-d tree answer queries exactly.

mod kdtree;
mod patch;

pub use patch::{patch_count, patch_transform, synthesize_mean, Patch};

use kdtree::{brute_force_knn, KdTree};

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Scan every entry.
    ExactBruteForce,
    /// k-d tree; same results as the scan.
    #[default]
    Indexed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Patch side; odd and at least 3.
    pub patch_size: usize,
    /// Spatial weight λ.
    pub lambda: f64,
    /// Neighbours per query.
    pub k: usize,
    pub mode: SearchMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { patch_size: 5, lambda: 10.0, k: 5, mode: SearchMode::Indexed }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 3 || self.patch_size.is_multiple_of(2) {
            return Err(Error::invalid(format!("patch size must be odd and >= 3, got {}", self.patch_size)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda {}", self.lambda)));
        }
        if self.k < 1 {
            return Err(Error::invalid("k must be >= 1"));
        }
        Ok(())
    }

    /// Dimension of the embedding space.
    pub fn dim(&self) -> usize {
        self.patch_size * self.patch_size + 2
    }

    fn embed_into(&self, patch: &Patch, out: &mut Vec<f64>) {
        let s = self.lambda.sqrt();
        out.extend_from_slice(&patch.ac);
        out.push(s * patch.location.0);
        out.push(s * patch.location.1);
    }

    pub fn embed(&self, patch: &Patch) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        self.embed_into(patch, &mut v);
        v
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Neighbor<'a> {
    /// Row-major index of the entry in the source patch transform.
    pub entry: usize,
    pub patch: &'a Patch,
    /// `D(query, patch)`.
    pub distance: f64,
}

/// All patches of a source image, searchable by [`PatchIndex::query_knn`].
#[derive(Clone, Debug)]
pub struct PatchIndex {
    width: usize,
    height: usize,
    config: SearchConfig,
    patches: Vec<Patch>,
    /// Embedded entries; only kept for the linear scan (the tree has its own copy).
    points: Vec<f64>,
    tree: Option<KdTree>,
}

impl PatchIndex {
    pub fn build(img: &Image, config: SearchConfig) -> Result<Self> {
        config.validate()?;
        let patches = patch_transform(img, config.patch_size)?;
        let mut points = Vec::with_capacity(patches.len() * config.dim());
        for p in &patches {
            config.embed_into(p, &mut points);
        }
        let tree = match config.mode {
            SearchMode::Indexed => Some(KdTree::build(&std::mem::take(&mut points), config.dim())),
            SearchMode::ExactBruteForce => None,
        };
        Ok(Self { width: img.width(), height: img.height(), config, patches, points, tree })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn entries(&self) -> &[Patch] {
        &self.patches
    }

    /// The `k` entries closest to `query`, ascending by distance, ties by entry
    /// index. `k` is clamped to the number of entries; the returned length is
    /// the actual count.
    pub fn query_knn(&self, query: &Patch, k: usize) -> Result<Vec<Neighbor<'_>>> {
        if query.size != self.config.patch_size || query.ac.len() != query.size * query.size {
            return Err(Error::mismatch(format!(
                "query patch size {} vs index patch size {}",
                query.size, self.config.patch_size
            )));
        }
        if k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        let k = k.min(self.len());
        let q = self.config.embed(query);
        let found = match &self.tree {
            Some(tree) => tree.knn(&q, k),
            None => brute_force_knn(&self.points, self.config.dim(), &q, k),
        };
        Ok(found
            .into_iter()
            .map(|c| Neighbor { entry: c.index, patch: &self.patches[c.index], distance: c.dist2.sqrt() })
            .collect())
    }
}

pub fn build_index(img: &Image, config: SearchConfig) -> Result<PatchIndex> {
    PatchIndex::build(img, config)
}

pub fn query_knn<'a>(index: &'a PatchIndex, query: &Patch, k: usize) -> Result<Vec<Neighbor<'a>>> {
    index.query_knn(query, k)
}
