//! Word alignment: IBM Model 1 lexical translation tables trained by EM,
//! directional Viterbi alignments, symmetrization, and the alignment file
//! format.
//!
//! Token keys are the fully rendered lexical forms (lemma plus tags), so the
//! model aligns the analyzed corpus, never bare lemmas. A distinguished NULL
//! source key lets target words stay unaligned. All containers are ordered,
//! which makes training and alignment bit-deterministic for a fixed input
//! order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::SentencePair;
use crate::error::{Error, Result};

/// Distinguished source key for the empty word. Rendered token keys always
/// start with `^`, so this cannot collide.
pub const NULL_KEY: &str = "<NULL>";

/// Probability floor for token pairs never seen in training.
pub const UNSEEN_PROB: f64 = 1e-12;

/// IBM Model 1 translation probabilities t(target-key | source-key).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalTranslationTable {
    pub direction: String,
    probs: BTreeMap<String, BTreeMap<String, f64>>,
}

impl LexicalTranslationTable {
    /// t(target | source), with the unseen-pair floor.
    pub fn prob(&self, target_key: &str, source_key: &str) -> f64 {
        self.probs
            .get(source_key)
            .and_then(|row| row.get(target_key))
            .copied()
            .unwrap_or(UNSEEN_PROB)
    }

    pub fn source_keys(&self) -> impl Iterator<Item = &str> {
        self.probs.keys().map(String::as_str)
    }

    pub fn row(&self, source_key: &str) -> Option<&BTreeMap<String, f64>> {
        self.probs.get(source_key)
    }
}

/// Log-likelihood and normalization health captured after each EM step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub log_likelihood: f64,
    pub max_normalization_error: f64,
}

/// Trains IBM Model 1 for exactly `iterations` EM iterations starting from a
/// uniform initialization over each source key's co-occurring target
/// vocabulary. `iterations = 0` returns the initialization untouched.
pub fn train_ibm1(pairs: &[SentencePair], iterations: usize) -> Result<LexicalTranslationTable> {
    train_ibm1_trace(pairs, iterations).map(|(table, _)| table)
}

/// Like [`train_ibm1`] but also reports per-iteration statistics. Entry 0
/// describes the uniform initialization, entry k the state after the k-th
/// iteration.
pub fn train_ibm1_trace(
    pairs: &[SentencePair],
    iterations: usize,
) -> Result<(LexicalTranslationTable, Vec<IterationStats>)> {
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    // Render every token once.
    let rendered: Vec<(Vec<String>, Vec<String>)> = pairs
        .iter()
        .map(|pair| {
            let src = pair.source.tokens.iter().map(|w| w.render()).collect();
            let tgt = pair.target.tokens.iter().map(|w| w.render()).collect();
            (src, tgt)
        })
        .collect();

    let mut cooc: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (src, tgt) in &rendered {
        for key in src.iter().map(String::as_str).chain([NULL_KEY]) {
            let row = cooc.entry(key.to_string()).or_default();
            row.extend(tgt.iter().cloned());
        }
    }

    let mut probs: BTreeMap<String, BTreeMap<String, f64>> = cooc
        .into_iter()
        .map(|(src, targets)| {
            let p = 1.0 / targets.len() as f64;
            (src, targets.into_iter().map(|t| (t, p)).collect())
        })
        .collect();

    let mut stats = vec![IterationStats {
        log_likelihood: log_likelihood(&rendered, &probs),
        max_normalization_error: max_normalization_error(&probs),
    }];

    for _ in 0..iterations {
        let mut counts: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (src, tgt) in &rendered {
            for f in tgt {
                let denom: f64 = src
                    .iter()
                    .map(String::as_str)
                    .chain([NULL_KEY])
                    .map(|e| probs[e][f])
                    .sum();
                for e in src.iter().map(String::as_str).chain([NULL_KEY]) {
                    *counts
                        .entry(e.to_string())
                        .or_default()
                        .entry(f.clone())
                        .or_insert(0.0) += probs[e][f] / denom;
                }
            }
        }
        for (e, row) in counts {
            let total: f64 = row.values().sum();
            let normalized = probs.get_mut(&e).expect("count rows come from prob rows");
            for (f, c) in row {
                normalized.insert(f, c / total);
            }
        }
        stats.push(IterationStats {
            log_likelihood: log_likelihood(&rendered, &probs),
            max_normalization_error: max_normalization_error(&probs),
        });
    }

    let table = LexicalTranslationTable {
        direction: "source->target".into(),
        probs,
    };
    Ok((table, stats))
}

fn log_likelihood(
    rendered: &[(Vec<String>, Vec<String>)],
    probs: &BTreeMap<String, BTreeMap<String, f64>>,
) -> f64 {
    let mut ll = 0.0;
    for (src, tgt) in rendered {
        let norm = ((src.len() + 1) as f64).ln();
        for f in tgt {
            let total: f64 = src
                .iter()
                .map(String::as_str)
                .chain([NULL_KEY])
                .map(|e| probs[e][f])
                .sum();
            ll += total.ln() - norm;
        }
    }
    ll
}

fn max_normalization_error(probs: &BTreeMap<String, BTreeMap<String, f64>>) -> f64 {
    probs
        .values()
        .map(|row| (row.values().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Set of (target position, source position) links over one sentence pair,
/// 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentMatrix {
    pub links: BTreeSet<(usize, usize)>,
    pub source_len: usize,
    pub target_len: usize,
}

impl AlignmentMatrix {
    pub fn new(source_len: usize, target_len: usize) -> Self {
        AlignmentMatrix {
            links: BTreeSet::new(),
            source_len,
            target_len,
        }
    }

    pub fn with_links(
        links: impl IntoIterator<Item = (usize, usize)>,
        source_len: usize,
        target_len: usize,
    ) -> Result<Self> {
        let mut matrix = AlignmentMatrix::new(source_len, target_len);
        for (i, j) in links {
            matrix.insert(i, j)?;
        }
        Ok(matrix)
    }

    pub fn insert(&mut self, target: usize, source: usize) -> Result<()> {
        if target >= self.target_len || source >= self.source_len {
            return Err(Error::InvalidArgument(format!(
                "link ({target},{source}) outside {}x{} matrix",
                self.target_len, self.source_len
            )));
        }
        self.links.insert((target, source));
        Ok(())
    }

    /// Swaps source and target roles.
    pub fn transpose(&self) -> AlignmentMatrix {
        AlignmentMatrix {
            links: self.links.iter().map(|&(i, j)| (j, i)).collect(),
            source_len: self.target_len,
            target_len: self.source_len,
        }
    }

    fn same_dimensions(&self, other: &AlignmentMatrix) -> bool {
        self.source_len == other.source_len && self.target_len == other.target_len
    }
}

/// Viterbi alignment of one pair under a source-to-target table: each target
/// position links to its most probable source position, or stays unaligned
/// when the NULL word is strictly more probable. Ties go to the lowest
/// source index.
pub fn viterbi_align(pair: &SentencePair, table: &LexicalTranslationTable) -> AlignmentMatrix {
    let src_keys: Vec<String> = pair.source.tokens.iter().map(|w| w.render()).collect();
    let mut matrix = AlignmentMatrix::new(pair.source.len(), pair.target.len());
    for (i, f) in pair.target.tokens.iter().enumerate() {
        let f_key = f.render();
        let mut best_j = 0;
        let mut best_p = f64::NEG_INFINITY;
        for (j, e_key) in src_keys.iter().enumerate() {
            let p = table.prob(&f_key, e_key);
            if p > best_p {
                best_p = p;
                best_j = j;
            }
        }
        if table.prob(&f_key, NULL_KEY) > best_p {
            continue;
        }
        matrix
            .insert(i, best_j)
            .expect("viterbi links are in range");
    }
    matrix
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetrization {
    Intersection,
    Union,
    Refined,
}

impl std::str::FromStr for Symmetrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(Symmetrization::Intersection),
            "union" => Ok(Symmetrization::Union),
            "refined" => Ok(Symmetrization::Refined),
            other => Err(Error::InvalidArgument(format!(
                "unknown symmetrization method {other:?}"
            ))),
        }
    }
}

/// Combines two directional alignments expressed in the same orientation
/// (the caller transposes the backward Viterbi output).
pub fn symmetrize(
    a_fwd: &AlignmentMatrix,
    a_bwd: &AlignmentMatrix,
    method: Symmetrization,
) -> Result<AlignmentMatrix> {
    if !a_fwd.same_dimensions(a_bwd) {
        return Err(Error::Dimension(format!(
            "forward alignment is {}x{}, backward is {}x{}",
            a_fwd.target_len, a_fwd.source_len, a_bwd.target_len, a_bwd.source_len
        )));
    }
    let links = match method {
        Symmetrization::Intersection => a_fwd.links.intersection(&a_bwd.links).copied().collect(),
        Symmetrization::Union => a_fwd.links.union(&a_bwd.links).copied().collect(),
        Symmetrization::Refined => refined(a_fwd, a_bwd),
    };
    Ok(AlignmentMatrix {
        links,
        source_len: a_fwd.source_len,
        target_len: a_fwd.target_len,
    })
}

/// Refined growing: start from the intersection; repeatedly adopt union
/// links 8-adjacent to the current set whose row or column is still
/// uncovered, scanning in row-major order until a fixpoint; finally adopt
/// remaining union links whose row and column are both uncovered.
fn refined(a_fwd: &AlignmentMatrix, a_bwd: &AlignmentMatrix) -> BTreeSet<(usize, usize)> {
    let union: BTreeSet<(usize, usize)> = a_fwd.links.union(&a_bwd.links).copied().collect();
    let mut links: BTreeSet<(usize, usize)> =
        a_fwd.links.intersection(&a_bwd.links).copied().collect();
    let mut row_covered = vec![false; a_fwd.target_len];
    let mut col_covered = vec![false; a_fwd.source_len];
    for &(i, j) in &links {
        row_covered[i] = true;
        col_covered[j] = true;
    }

    loop {
        let mut added = false;
        for &(i, j) in &union {
            if links.contains(&(i, j)) || (row_covered[i] && col_covered[j]) {
                continue;
            }
            if !adjacent(&links, i, j) {
                continue;
            }
            links.insert((i, j));
            row_covered[i] = true;
            col_covered[j] = true;
            added = true;
        }
        if !added {
            break;
        }
    }

    for &(i, j) in &union {
        if !links.contains(&(i, j)) && !row_covered[i] && !col_covered[j] {
            links.insert((i, j));
            row_covered[i] = true;
            col_covered[j] = true;
        }
    }
    links
}

fn adjacent(links: &BTreeSet<(usize, usize)>, i: usize, j: usize) -> bool {
    for di in -1i64..=1 {
        for dj in -1i64..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni >= 0 && nj >= 0 && links.contains(&(ni as usize, nj as usize)) {
                return true;
            }
        }
    }
    false
}

/// One line per sentence pair, each link written `j-i` (source-target,
/// 0-based) sorted by (j, i). Pairs without links produce an empty line.
pub fn export_alignments(alignments: &[AlignmentMatrix]) -> String {
    let mut out = String::new();
    for matrix in alignments {
        let mut links: Vec<(usize, usize)> = matrix.links.iter().map(|&(i, j)| (j, i)).collect();
        links.sort_unstable();
        let rendered: Vec<String> = links.iter().map(|(j, i)| format!("{j}-{i}")).collect();
        out.push_str(&rendered.join(" "));
        out.push('\n');
    }
    out
}

/// Parses an alignment file against the corpus it belongs to. Lines starting
/// with `#` are ignored; remaining line count must equal the pair count.
pub fn import_alignments(text: &str, pairs: &[SentencePair]) -> Result<Vec<AlignmentMatrix>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.starts_with('#'))
        .collect();
    if lines.len() != pairs.len() {
        return Err(Error::InvalidArgument(format!(
            "alignment file has {} lines but the corpus has {} pairs",
            lines.len(),
            pairs.len()
        )));
    }

    lines
        .iter()
        .zip(pairs)
        .map(|(&(idx, line), pair)| {
            let line_no = idx + 1;
            let mut matrix = AlignmentMatrix::new(pair.source.len(), pair.target.len());
            for item in line.split_whitespace() {
                let (j, i) = item.split_once('-').ok_or_else(|| Error::Alignment {
                    line: line_no,
                    message: format!("malformed link {item:?}, expected j-i"),
                })?;
                let j: usize = j.parse().map_err(|_| Error::Alignment {
                    line: line_no,
                    message: format!("malformed source index in {item:?}"),
                })?;
                let i: usize = i.parse().map_err(|_| Error::Alignment {
                    line: line_no,
                    message: format!("malformed target index in {item:?}"),
                })?;
                matrix.insert(i, j).map_err(|_| Error::Alignment {
                    line: line_no,
                    message: format!(
                        "link {item} outside the {}x{} sentence pair",
                        pair.source.len(),
                        pair.target.len()
                    ),
                })?;
            }
            Ok(matrix)
        })
        .collect()
}
