//! Spectral-similarity densification of a sparse albedo map.
//!
//! Measured pixels form a dictionary of (signature, albedo) pairs. Every
//! pixel without albedo is assigned the mean linear-RGB albedo of the
//! `k` entries with the lowest hybrid score
//!
//! ```text
//! score(q, e) = ‖q − e‖₂ − α · cos(q, e)
//! ```
//!
//! Ties are broken by dictionary order, which is row-major source-pixel order.
//! Signatures are compared as raw radiance, so α is in radiance units.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::albedo::{AlbedoMap, AlbedoPixel, Provenance};
use crate::error::{Error, Result};
use crate::spectral::{SpectralCube, SpectralSignature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Linear scan over every entry; the reference.
    #[default]
    BruteForce,
    /// Entries sorted by norm, scanned outward from the query's norm and cut
    /// off with the bound `score ≥ |‖q‖ − ‖e‖| − α`. Exact.
    NormPruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensifierConfig {
    pub alpha: f64,
    pub k_neighbors: usize,
    #[serde(default)]
    pub search: SearchStrategy,
}

impl Default for DensifierConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            k_neighbors: 3,
            search: SearchStrategy::BruteForce,
        }
    }
}

impl DensifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::domain(
                "alpha",
                format!("{} must be a nonnegative number", self.alpha),
            ));
        }
        if self.k_neighbors == 0 {
            return Err(Error::domain("k_neighbors", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryEntry {
    pub signature: SpectralSignature,
    pub albedo: [f64; 3],
    pub source: (usize, usize),
    norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDictionary {
    entries: Vec<DictionaryEntry>,
    band_count: usize,
}

impl SpectralDictionary {
    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn band_count(&self) -> usize {
        self.band_count
    }
}

/// One entry per measured pixel of `sparse`, in row-major order. Densified
/// pixels are never used as dictionary entries.
pub fn build_dictionary(cube: &SpectralCube, sparse: &AlbedoMap) -> Result<SpectralDictionary> {
    if cube.width() != sparse.width() || cube.height() != sparse.height() {
        return Err(Error::Dimension(format!(
            "cube is {}x{} but albedo map is {}x{}",
            cube.width(),
            cube.height(),
            sparse.width(),
            sparse.height()
        )));
    }
    let entries: Vec<DictionaryEntry> = sparse
        .iter_valid()
        .filter(|(_, _, p)| p.provenance == Provenance::Measured)
        .map(|(x, y, p)| {
            let values = cube.pixel(x, y).to_vec();
            DictionaryEntry {
                norm: norm(&values),
                signature: SpectralSignature(values),
                albedo: p.linear,
                source: (x, y),
            }
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    Ok(SpectralDictionary {
        entries,
        band_count: cube.band_count(),
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridDistance {
    pub score: f64,
    /// One of the signatures had zero norm; the cosine term was taken as 0.
    pub degenerate: bool,
}

fn score_with_norms(q: &[f64], q_norm: f64, e: &[f64], e_norm: f64, alpha: f64) -> HybridDistance {
    let mut sq = 0.0;
    let mut dot = 0.0;
    for (a, b) in q.iter().zip(e) {
        let d = a - b;
        sq += d * d;
        dot += a * b;
    }
    let degenerate = q_norm == 0.0 || e_norm == 0.0;
    let cos = if degenerate { 0.0 } else { dot / (q_norm * e_norm) };
    HybridDistance {
        score: sq.sqrt() - alpha * cos,
        degenerate,
    }
}

/// Euclidean distance minus α times cosine similarity; lower is closer.
pub fn hybrid_distance(query: &SpectralSignature, entry: &SpectralSignature, alpha: f64) -> Result<HybridDistance> {
    if query.len() != entry.len() {
        return Err(Error::SignatureLength(query.len(), entry.len()));
    }
    Ok(score_with_norms(
        &query.0,
        norm(&query.0),
        &entry.0,
        norm(&entry.0),
        alpha,
    ))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f64,
    index: usize,
}

impl Candidate {
    fn cmp(&self, other: &Candidate) -> Ordering {
        self.score.total_cmp(&other.score).then(self.index.cmp(&other.index))
    }
}

/// Keeps the `k` best candidates, sorted best-first.
struct TopK {
    k: usize,
    best: Vec<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            best: Vec::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, c: Candidate) {
        if self.best.len() == self.k && c.cmp(&self.best[self.k - 1]) != Ordering::Less {
            return;
        }
        let pos = self.best.partition_point(|b| b.cmp(&c) == Ordering::Less);
        self.best.insert(pos, c);
        self.best.truncate(self.k);
    }

    fn worst_score(&self) -> Option<f64> {
        (self.best.len() == self.k).then(|| self.best[self.k - 1].score)
    }
}

/// Result of a neighbor query: dictionary indices best-first.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    pub indices: Vec<usize>,
    pub degenerate: bool,
}

/// Neighbor search over a dictionary. Both strategies return identical
/// results.
pub struct NeighborSearch<'a> {
    dictionary: &'a SpectralDictionary,
    alpha: f64,
    k: usize,
    strategy: SearchStrategy,
    by_norm: Vec<usize>,
    has_zero_entry: bool,
}

impl<'a> NeighborSearch<'a> {
    /// `k` is reduced to the dictionary size when larger.
    pub fn new(dictionary: &'a SpectralDictionary, alpha: f64, k: usize, strategy: SearchStrategy) -> Self {
        let mut by_norm: Vec<usize> = Vec::new();
        if strategy == SearchStrategy::NormPruned {
            by_norm = (0..dictionary.len()).collect();
            by_norm.sort_by(|&a, &b| {
                dictionary.entries[a]
                    .norm
                    .total_cmp(&dictionary.entries[b].norm)
                    .then(a.cmp(&b))
            });
        }
        Self {
            dictionary,
            alpha,
            k: k.min(dictionary.len()).max(1),
            strategy,
            by_norm,
            has_zero_entry: dictionary.entries.iter().any(|e| e.norm == 0.0),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn visit(&self, signature: &[f64], q_norm: f64, index: usize, top: &mut TopK) {
        let e = &self.dictionary.entries[index];
        let d = score_with_norms(signature, q_norm, &e.signature.0, e.norm, self.alpha);
        top.offer(Candidate { score: d.score, index });
    }

    pub fn query(&self, signature: &[f64]) -> Neighbors {
        let q_norm = norm(signature);
        let mut top = TopK::new(self.k);
        match self.strategy {
            SearchStrategy::BruteForce => {
                for index in 0..self.dictionary.len() {
                    self.visit(signature, q_norm, index, &mut top);
                }
            }
            SearchStrategy::NormPruned => self.pruned_scan(signature, q_norm, &mut top),
        }
        Neighbors {
            indices: top.best.iter().map(|c| c.index).collect(),
            degenerate: q_norm == 0.0 || self.has_zero_entry,
        }
    }

    fn pruned_scan(&self, signature: &[f64], q_norm: f64, top: &mut TopK) {
        let entries = &self.dictionary.entries;
        let gap = |slot: usize| (entries[self.by_norm[slot]].norm - q_norm).abs();
        // absorbs rounding in the computed score so the bound never cuts a tie
        let slack = 1e-9 * (1.0 + q_norm + self.alpha);
        let start = self.by_norm.partition_point(|&i| entries[i].norm < q_norm);
        let (mut down, mut up) = (start, start);
        loop {
            let below = (down > 0).then(|| gap(down - 1));
            let above = (up < self.by_norm.len()).then(|| gap(up));
            let take_below = match (below, above) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(b), Some(a)) => b <= a,
            };
            let next_gap = if take_below { below } else { above }.expect("side exists");
            if let Some(worst) = top.worst_score() {
                if next_gap - self.alpha > worst + slack {
                    break;
                }
            }
            let slot = if take_below {
                down -= 1;
                down
            } else {
                up += 1;
                up - 1
            };
            self.visit(signature, q_norm, self.by_norm[slot], top);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DensifySummary {
    pub dictionary_size: usize,
    pub requested_k: usize,
    pub effective_k: usize,
    pub filled: usize,
    /// Queries where a zero-norm signature made the cosine term degenerate.
    pub degenerate_queries: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Densified {
    pub albedo: AlbedoMap,
    pub summary: DensifySummary,
}

/// Dictionary index chosen for every pixel lacking albedo, row-major.
pub fn assignments(
    cube: &SpectralCube,
    sparse: &AlbedoMap,
    config: &DensifierConfig,
) -> Result<Vec<((usize, usize), Neighbors)>> {
    config.validate()?;
    let dictionary = build_dictionary(cube, sparse)?;
    let search = NeighborSearch::new(&dictionary, config.alpha, config.k_neighbors, config.search);
    Ok(query_missing(cube, sparse, &search))
}

fn query_missing(
    cube: &SpectralCube,
    sparse: &AlbedoMap,
    search: &NeighborSearch<'_>,
) -> Vec<((usize, usize), Neighbors)> {
    let missing: Vec<(usize, usize)> = sparse
        .pixels()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_none())
        .map(|(i, _)| (i % sparse.width(), i / sparse.width()))
        .collect();
    missing
        .into_par_iter()
        .map(|(x, y)| ((x, y), search.query(cube.pixel(x, y))))
        .collect()
}

/// Fills every pixel of `sparse` that has no albedo. Measured pixels pass
/// through unchanged; filled pixels are tagged [`Provenance::Densified`].
pub fn densify(cube: &SpectralCube, sparse: &AlbedoMap, config: &DensifierConfig) -> Result<Densified> {
    config.validate()?;
    let dictionary = build_dictionary(cube, sparse)?;
    let search = NeighborSearch::new(&dictionary, config.alpha, config.k_neighbors, config.search);
    let mut summary = DensifySummary {
        dictionary_size: dictionary.len(),
        requested_k: config.k_neighbors,
        effective_k: search.k(),
        ..Default::default()
    };
    if search.k() < config.k_neighbors {
        summary.warnings.push(format!(
            "k_neighbors reduced from {} to dictionary size {}",
            config.k_neighbors,
            search.k()
        ));
    }

    let mut albedo = sparse.clone();
    for ((x, y), neighbors) in query_missing(cube, sparse, &search) {
        let mut sum = [0.0; 3];
        for &i in &neighbors.indices {
            for (acc, v) in sum.iter_mut().zip(dictionary.entries[i].albedo) {
                *acc += v;
            }
        }
        let n = neighbors.indices.len() as f64;
        albedo.set(x, y, Some(AlbedoPixel::new(sum.map(|s| s / n), Provenance::Densified)));
        summary.filled += 1;
        summary.degenerate_queries += usize::from(neighbors.degenerate);
    }
    if summary.degenerate_queries > 0 {
        summary.warnings.push(format!(
            "{} queries involved zero-norm signatures",
            summary.degenerate_queries
        ));
    }
    Ok(Densified { albedo, summary })
}
