//! Analyzed-stream corpora: parsing, validation and serialization.
//!
//! A corpus file holds one sentence per line. Each token is written
//! `^lemma<cat><tag>...<tag>$`; tokens are separated by whitespace. The
//! first tag is the lexical category, the remaining tags carry the
//! morphological inflection. Inside a lemma, `\` escapes the five
//! metacharacters `^ $ < > \`, so lemmas like `más$` survive a round trip.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Characters that must be backslash-escaped inside a lemma.
pub const METACHARS: [char; 5] = ['^', '$', '<', '>', '\\'];

/// One analyzed word: lemma, lexical category and ordered inflection tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LexicalForm {
    pub lemma: String,
    pub category: String,
    pub inflection: Vec<String>,
}

impl LexicalForm {
    pub fn new(
        lemma: impl Into<String>,
        category: impl Into<String>,
        inflection: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self> {
        let form = LexicalForm {
            lemma: lemma.into(),
            category: category.into(),
            inflection: inflection.into_iter().map(Into::into).collect(),
        };
        form.validate()?;
        Ok(form)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lemma.is_empty() {
            return Err(Error::InvalidArgument("empty lemma".into()));
        }
        for tag in std::iter::once(&self.category).chain(&self.inflection) {
            validate_tag(tag)?;
        }
        Ok(())
    }

    /// Renders the stream-format token, escaping metacharacters in the lemma.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.lemma.len() + 8);
        out.push('^');
        for c in self.lemma.chars() {
            if METACHARS.contains(&c) {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('<');
        out.push_str(&self.category);
        out.push('>');
        for tag in &self.inflection {
            out.push('<');
            out.push_str(tag);
            out.push('>');
        }
        out.push('$');
        out
    }
}

impl fmt::Display for LexicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn validate_tag(tag: &str) -> Result<()> {
    if tag.is_empty() {
        return Err(Error::InvalidArgument("empty tag".into()));
    }
    if let Some(c) = tag
        .chars()
        .find(|c| c.is_whitespace() || METACHARS.contains(c))
    {
        return Err(Error::InvalidArgument(format!(
            "tag {tag:?} contains illegal character {c:?}"
        )));
    }
    Ok(())
}

/// A sentence in the intermediate representation; positions are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnalyzedSentence {
    pub tokens: Vec<LexicalForm>,
}

impl AnalyzedSentence {
    pub fn new(tokens: Vec<LexicalForm>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("empty sentence".into()));
        }
        Ok(AnalyzedSentence { tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// One line of a sentence-aligned parallel corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub source: AnalyzedSentence,
    pub target: AnalyzedSentence,
    /// 1-based line in the originating files, for diagnostics.
    pub line_number: usize,
}

/// Parses one corpus line into a sentence. The inverse of
/// [`format_analyzed_line`].
pub fn parse_analyzed_line(line: &str) -> Result<AnalyzedSentence> {
    let mut scanner = Scanner::new(line);
    let mut tokens = Vec::new();
    loop {
        scanner.skip_whitespace();
        if scanner.at_end() {
            break;
        }
        tokens.push(scanner.token(tokens.len() + 1)?);
    }
    if tokens.is_empty() {
        return Err(Error::Stream {
            token: 1,
            column: 1,
            message: "empty line".into(),
        });
    }
    Ok(AnalyzedSentence { tokens })
}

/// Renders a sentence as one corpus line; `parse_analyzed_line` round-trips
/// it exactly.
pub fn format_analyzed_line(sentence: &AnalyzedSentence) -> String {
    let rendered: Vec<String> = sentence.tokens.iter().map(LexicalForm::render).collect();
    rendered.join(" ")
}

/// Parses a whole corpus, one sentence per line. Line numbers in errors are
/// 1-based.
pub fn parse_corpus(text: &str, path: &str) -> Result<Vec<AnalyzedSentence>> {
    text.lines()
        .enumerate()
        .map(|(idx, line)| {
            parse_analyzed_line(line).map_err(|e| Error::Corpus {
                path: path.to_string(),
                line: idx + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<AnalyzedSentence>> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_corpus(&text, &path.display().to_string())
}

/// Loads a line-aligned pair of corpus files. Line k of each file forms one
/// sentence pair.
pub fn load_parallel(
    source_file: impl AsRef<Path>,
    target_file: impl AsRef<Path>,
) -> Result<Vec<SentencePair>> {
    let source_path = source_file.as_ref().display().to_string();
    let target_path = target_file.as_ref().display().to_string();
    let source_text = std::fs::read_to_string(source_file.as_ref())
        .map_err(|e| Error::io(source_path.clone(), e))?;
    let target_text = std::fs::read_to_string(target_file.as_ref())
        .map_err(|e| Error::io(target_path.clone(), e))?;

    let source_lines: Vec<&str> = source_text.lines().collect();
    let target_lines: Vec<&str> = target_text.lines().collect();
    if source_lines.len() != target_lines.len() {
        return Err(Error::LineCountMismatch {
            source_path,
            source_lines: source_lines.len(),
            target_path,
            target_lines: target_lines.len(),
        });
    }

    source_lines
        .iter()
        .zip(&target_lines)
        .enumerate()
        .map(|(idx, (src, tgt))| {
            let source = parse_analyzed_line(src).map_err(|e| Error::Corpus {
                path: source_path.clone(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            let target = parse_analyzed_line(tgt).map_err(|e| Error::Corpus {
                path: target_path.clone(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            Ok(SentencePair {
                source,
                target,
                line_number: idx + 1,
            })
        })
        .collect()
}

/// Character scanner over one line. Columns are 1-based character offsets.
/// Shared with the template-dump and rule-file parsers, which embed stream
/// tokens in their own grammars.
pub(crate) struct Scanner {
    chars: Vec<char>,
    pos: usize,
}

impl Scanner {
    pub(crate) fn new(line: &str) -> Self {
        Scanner {
            chars: line.chars().collect(),
            pos: 0,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    pub(crate) fn skip_whitespace(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, token: usize, message: impl Into<String>) -> Error {
        Error::Stream {
            token,
            column: self.column(),
            message: message.into(),
        }
    }

    /// Scans one `^lemma<tags>$` token. `index` is the 1-based token number
    /// used in error messages.
    pub(crate) fn token(&mut self, index: usize) -> Result<LexicalForm> {
        match self.peek() {
            Some('^') => {
                self.bump();
            }
            Some(c) => return Err(self.err(index, format!("expected '^', found {c:?}"))),
            None => return Err(self.err(index, "expected '^' at end of line")),
        }

        let mut lemma = String::new();
        loop {
            match self.peek() {
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(c) if METACHARS.contains(&c) => lemma.push(c),
                        Some(c) => {
                            self.pos -= 1;
                            return Err(self.err(index, format!("invalid escape '\\{c}'")));
                        }
                        None => return Err(self.err(index, "dangling '\\' at end of line")),
                    }
                }
                Some('<') => break,
                Some('$') => {
                    return Err(self.err(index, "missing category tag"));
                }
                Some(c) if METACHARS.contains(&c) => {
                    return Err(self.err(index, format!("unescaped {c:?} in lemma")));
                }
                Some(c) => {
                    self.bump();
                    lemma.push(c);
                }
                None => return Err(self.err(index, "unterminated token")),
            }
        }
        if lemma.is_empty() {
            return Err(self.err(index, "empty lemma"));
        }

        let mut tags = Vec::new();
        loop {
            match self.peek() {
                Some('<') => tags.push(self.tag(index)?),
                Some('$') => {
                    self.bump();
                    break;
                }
                Some(c) => return Err(self.err(index, format!("expected '<' or '$', found {c:?}"))),
                None => return Err(self.err(index, "unterminated token")),
            }
        }
        // tags is non-empty here: the lemma loop only exits at '<'.
        let category = tags.remove(0);
        Ok(LexicalForm {
            lemma,
            category,
            inflection: tags,
        })
    }

    /// Scans one `<tag>` group.
    pub(crate) fn tag(&mut self, index: usize) -> Result<String> {
        match self.peek() {
            Some('<') => {
                self.bump();
            }
            Some(c) => return Err(self.err(index, format!("expected '<', found {c:?}"))),
            None => return Err(self.err(index, "expected '<' at end of input")),
        }
        let mut tag = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    break;
                }
                Some(c) if c.is_whitespace() || METACHARS.contains(&c) => {
                    return Err(self.err(index, format!("illegal character {c:?} in tag")));
                }
                Some(c) => {
                    self.bump();
                    tag.push(c);
                }
                None => return Err(self.err(index, "unterminated tag")),
            }
        }
        if tag.is_empty() {
            return Err(self.err(index, "empty tag"));
        }
        Ok(tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(lemma: &str, category: &str, tags: &[&str]) -> LexicalForm {
        LexicalForm::new(lemma, category, tags.iter().copied()).unwrap()
    }

    #[test]
    fn parses_multi_token_line() {
        let parsed =
            parse_analyzed_line("^vivir<verb><pret><3rd><pl>$ ^en<pr>$ ^Francia<noun><loc>$")
                .unwrap();
        assert_eq!(
            parsed.tokens,
            vec![
                form("vivir", "verb", &["pret", "3rd", "pl"]),
                form("en", "pr", &[]),
                form("Francia", "noun", &["loc"]),
            ]
        );
    }

    #[test]
    fn parses_single_token() {
        let parsed = parse_analyzed_line("^casa<noun><f><sg>$").unwrap();
        assert_eq!(parsed.tokens, vec![form("casa", "noun", &["f", "sg"])]);
    }

    #[test]
    fn rejects_token_without_category() {
        let err = parse_analyzed_line("^a<pr>$ ^b$").unwrap_err();
        match err {
            Error::Stream { token, column, .. } => {
                assert_eq!(token, 2);
                assert_eq!(column, 11);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_line() {
        assert!(parse_analyzed_line("").is_err());
        assert!(parse_analyzed_line("   ").is_err());
    }

    #[test]
    fn rejects_malformed_tokens() {
        for line in [
            "^<noun>$",        // empty lemma
            "^a<>$",           // empty tag
            "^a<noun>",        // unterminated token
            "a<noun>$",        // missing ^
            "^a<no un>$",      // whitespace in tag
            "^a$",             // no tags
            "^a\\q<noun>$",    // invalid escape
            "^a<noun>$ extra", // trailing junk
        ] {
            assert!(parse_analyzed_line(line).is_err(), "accepted {line:?}");
        }
    }

    #[test]
    fn format_is_fixpoint() {
        let line = "^en<pr>$";
        let parsed = parse_analyzed_line(line).unwrap();
        assert_eq!(format_analyzed_line(&parsed), line);
    }

    #[test]
    fn escaped_lemmas_round_trip() {
        let sentence = AnalyzedSentence {
            tokens: vec![
                form("más$", "adv", &[]),
                form("a^b<c>d\\e", "noun", &["sg"]),
                form("two words", "noun", &[]),
            ],
        };
        let line = format_analyzed_line(&sentence);
        assert_eq!(parse_analyzed_line(&line).unwrap(), sentence);
    }

    #[test]
    fn round_trips_random_sentences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let lemma_chars: Vec<char> = "ab^$<>\\ ñç.-*".chars().collect();
        let tag_chars: Vec<char> = "abcdef123".chars().collect();
        for _ in 0..500 {
            let tokens: Vec<LexicalForm> = (0..rng.gen_range(1..8))
                .map(|_| {
                    let lemma: String = (0..rng.gen_range(1..6))
                        .map(|_| lemma_chars[rng.gen_range(0..lemma_chars.len())])
                        .collect();
                    let category: String = (0..rng.gen_range(1..4))
                        .map(|_| tag_chars[rng.gen_range(0..tag_chars.len())])
                        .collect();
                    let inflection: Vec<String> = (0..rng.gen_range(0..4))
                        .map(|_| {
                            (0..rng.gen_range(1..3))
                                .map(|_| tag_chars[rng.gen_range(0..tag_chars.len())])
                                .collect()
                        })
                        .collect();
                    LexicalForm {
                        lemma,
                        category,
                        inflection,
                    }
                })
                .collect();
            let sentence = AnalyzedSentence { tokens };
            let line = format_analyzed_line(&sentence);
            assert_eq!(parse_analyzed_line(&line).unwrap(), sentence, "line {line:?}");
        }
    }

    #[test]
    fn corrupted_lines_are_rejected_with_position() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let base = "^vivir<verb><pret><3rd><pl>$ ^en<pr>$ ^Francia<noun><loc>$";
        let mut rejected = 0;
        for _ in 0..500 {
            let mut chars: Vec<char> = base.chars().collect();
            let at = rng.gen_range(0..chars.len());
            match rng.gen_range(0..3) {
                0 => {
                    chars.remove(at);
                }
                1 => chars.insert(at, ['^', '$', '<', '>'][rng.gen_range(0..4)]),
                2 => chars[at] = ['^', '$', '<', '>'][rng.gen_range(0..4)],
                _ => unreachable!(),
            }
            let line: String = chars.into_iter().collect();
            match parse_analyzed_line(&line) {
                // Some corruptions still form a valid line; that is fine.
                Ok(_) => {}
                Err(Error::Stream { token, column, .. }) => {
                    rejected += 1;
                    assert!(token >= 1);
                    assert!(column >= 1 && column <= line.chars().count() + 1);
                }
                Err(other) => panic!("unexpected error kind: {other:?}"),
            }
        }
        assert!(rejected > 200, "only {rejected} corruptions rejected");
    }

    #[test]
    fn load_parallel_reports_line_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src.txt");
        let tgt = dir.path().join("tgt.txt");
        std::fs::write(&src, "^a<n>$\n^b<n>$\n").unwrap();
        std::fs::write(&tgt, "^x<n>$\n").unwrap();
        let err = load_parallel(&src, &tgt).unwrap_err();
        match err {
            Error::LineCountMismatch {
                source_lines,
                target_lines,
                ..
            } => {
                assert_eq!((source_lines, target_lines), (2, 1));
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn load_parallel_reports_file_and_line_of_bad_token() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src.txt");
        let tgt = dir.path().join("tgt.txt");
        std::fs::write(&src, "^a<n>$\n^b<n>$\n").unwrap();
        std::fs::write(&tgt, "^x<n>$\n^broken\n").unwrap();
        let err = load_parallel(&src, &tgt).unwrap_err();
        match err {
            Error::Corpus { path, line, .. } => {
                assert!(path.ends_with("tgt.txt"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn load_parallel_keeps_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src.txt");
        let tgt = dir.path().join("tgt.txt");
        std::fs::write(&src, "^a<n>$\n^b<n>$\n^c<n>$\n").unwrap();
        std::fs::write(&tgt, "^x<n>$\n^y<n>$\n^z<n>$\n").unwrap();
        let pairs = load_parallel(&src, &tgt).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0].source.tokens[0].lemma, "a");
        assert_eq!(pairs[2].target.tokens[0].lemma, "z");
        assert_eq!(pairs[2].line_number, 3);
    }
}
