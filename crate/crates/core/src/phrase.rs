//! Bilingual phrase pair extraction from word-aligned sentence pairs.
//!
//! A (source span, target span) rectangle is extracted when it is consistent
//! (links leave neither side of the rectangle) and all four boundary words
//! are aligned to a word inside the opposite span. Only the source length is
//! capped; the target length is not.

use std::collections::BTreeSet;

use crate::align::AlignmentMatrix;
use crate::corpus::{LexicalForm, SentencePair};

/// Default cap on the number of source words per phrase.
pub const DEFAULT_MAX_SOURCE_LEN: usize = 7;

/// A consistent, boundary-aligned pair of spans with its span-local links
/// (target, source).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BilingualPhrasePair {
    pub source_start: usize,
    pub source_tokens: Vec<LexicalForm>,
    pub target_start: usize,
    pub target_tokens: Vec<LexicalForm>,
    pub links: BTreeSet<(usize, usize)>,
}

impl BilingualPhrasePair {
    pub fn source_len(&self) -> usize {
        self.source_tokens.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_tokens.len()
    }
}

/// Extracts every bilingual phrase pair of the word-aligned sentence pair,
/// in canonical order (source start, source length, target start, target
/// length).
///
/// For a fixed source span, boundary alignment pins the target span to the
/// exact row range of the span's links: a target boundary row outside that
/// range is either unaligned (boundary violation) or linked outside the
/// source span (consistency violation). So each source span yields at most
/// one phrase, checked here; the brute-force enumeration of the defining
/// clauses lives in the test suite as an independent oracle.
pub fn extract_phrases(
    pair: &SentencePair,
    alignment: &AlignmentMatrix,
    max_source_len: usize,
) -> Vec<BilingualPhrasePair> {
    assert_eq!(
        (alignment.source_len, alignment.target_len),
        (pair.source.len(), pair.target.len()),
        "alignment dimensions must match the sentence pair"
    );

    let source_len = pair.source.len();
    // Links grouped by source column and by target row.
    let mut by_col: Vec<Vec<usize>> = vec![Vec::new(); source_len];
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); pair.target.len()];
    for &(i, j) in &alignment.links {
        by_col[j].push(i);
        by_row[i].push(j);
    }

    let mut phrases = Vec::new();
    for j in 0..source_len {
        if by_col[j].is_empty() {
            // Source first word must be aligned; no span can start here.
            continue;
        }
        let mut row_min = usize::MAX;
        let mut row_max = 0;
        for last in j..source_len.min(j + max_source_len) {
            for &i in &by_col[last] {
                row_min = row_min.min(i);
                row_max = row_max.max(i);
            }
            if by_col[last].is_empty() {
                // Source last word must be aligned; keep extending.
                continue;
            }
            let consistent = (row_min..=row_max)
                .all(|i| by_row[i].iter().all(|&j2| j <= j2 && j2 <= last));
            if !consistent {
                continue;
            }
            let links = alignment
                .links
                .iter()
                .filter(|&&(i, j2)| i >= row_min && i <= row_max && j2 >= j && j2 <= last)
                .map(|&(i, j2)| (i - row_min, j2 - j))
                .collect();
            phrases.push(BilingualPhrasePair {
                source_start: j,
                source_tokens: pair.source.tokens[j..=last].to_vec(),
                target_start: row_min,
                target_tokens: pair.target.tokens[row_min..=row_max].to_vec(),
                links,
            });
        }
    }
    phrases.sort_by_key(|p| {
        (
            p.source_start,
            p.source_len(),
            p.target_start,
            p.target_len(),
        )
    });
    phrases
}

/// Debug dump: one phrase per line, `src tokens ||| tgt tokens ||| j-i links`.
pub fn dump_phrases(phrases: &[BilingualPhrasePair]) -> String {
    let mut out = String::new();
    for phrase in phrases {
        let src: Vec<String> = phrase.source_tokens.iter().map(|w| w.render()).collect();
        let tgt: Vec<String> = phrase.target_tokens.iter().map(|w| w.render()).collect();
        let mut links: Vec<(usize, usize)> = phrase.links.iter().map(|&(i, j)| (j, i)).collect();
        links.sort_unstable();
        let links: Vec<String> = links.iter().map(|(j, i)| format!("{j}-{i}")).collect();
        out.push_str(&format!(
            "{} ||| {} ||| {}\n",
            src.join(" "),
            tgt.join(" "),
            links.join(" ")
        ));
    }
    out
}
