//! Word classes and extended alignment templates: generalizing surviving
//! bilingual phrase pairs, counting templates, and selecting them by
//! frequency.
//!
//! A word maps to a morphological class (category plus inflection) unless
//! its category is lexicalized, in which case the whole lexical form is the
//! class. A template pairs a source class sequence with a target class
//! sequence, their alignment, and per-position target-language restrictions
//! derived from the bilingual dictionary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bidix::{derive_restriction, reproducible, BilingualDictionary, Restriction};
use crate::corpus::{LexicalForm, Scanner};
use crate::error::{Error, Result};
use crate::phrase::BilingualPhrasePair;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WordClass {
    /// Category plus inflection tags; never carries a lemma.
    Morph {
        category: String,
        inflection: Vec<String>,
    },
    /// A full lexical form; the word keeps its identity.
    Lexicalized(LexicalForm),
}

impl WordClass {
    /// Maps a word to its class under the given lexicalized category set.
    pub fn of(word: &LexicalForm, lexicalized_cats: &BTreeSet<String>) -> WordClass {
        if lexicalized_cats.contains(&word.category) {
            WordClass::Lexicalized(word.clone())
        } else {
            WordClass::Morph {
                category: word.category.clone(),
                inflection: word.inflection.clone(),
            }
        }
    }

    pub fn is_lexicalized(&self) -> bool {
        matches!(self, WordClass::Lexicalized(_))
    }

    /// Machine form used in template dumps and rule files: lexicalized
    /// classes are stream tokens, morphological classes bare tag groups.
    pub fn render(&self) -> String {
        match self {
            WordClass::Lexicalized(form) => form.render(),
            WordClass::Morph {
                category,
                inflection,
            } => {
                let mut out = format!("<{category}>");
                for tag in inflection {
                    out.push('<');
                    out.push_str(tag);
                    out.push('>');
                }
                out
            }
        }
    }

    /// Human form for reports: `lemma-(cat.tags)` for lexicalized classes,
    /// `(cat.tags)` otherwise, so lexicalized classes stay distinguishable.
    pub fn display(&self) -> String {
        let dotted = |category: &str, tags: &[String]| {
            let mut s = category.to_string();
            for tag in tags {
                s.push('.');
                s.push_str(tag);
            }
            s
        };
        match self {
            WordClass::Lexicalized(form) => {
                format!("{}-({})", form.lemma, dotted(&form.category, &form.inflection))
            }
            WordClass::Morph {
                category,
                inflection,
            } => format!("({})", dotted(category, inflection)),
        }
    }

    fn parse(unit: &str) -> Result<WordClass> {
        let mut scanner = Scanner::new(unit);
        match unit.chars().next() {
            Some('^') => {
                let form = scanner.token(1)?;
                if !scanner.at_end() {
                    return Err(Error::InvalidArgument(format!(
                        "trailing characters after lexicalized class {unit:?}"
                    )));
                }
                Ok(WordClass::Lexicalized(form))
            }
            Some('<') => {
                let mut tags = Vec::new();
                while !scanner.at_end() {
                    tags.push(scanner.tag(1)?);
                }
                let category = tags.remove(0);
                Ok(WordClass::Morph {
                    category,
                    inflection: tags,
                })
            }
            _ => Err(Error::InvalidArgument(format!(
                "word class must start with '^' or '<': {unit:?}"
            ))),
        }
    }
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

/// z = (S, T, A, R): source and target class sequences, span-local links
/// (target, source), and restrictions keyed by target position. Equality and
/// hashing cover all four parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExtendedAlignmentTemplate {
    pub sl_classes: Vec<WordClass>,
    pub tl_classes: Vec<WordClass>,
    pub alignment: BTreeSet<(usize, usize)>,
    pub restrictions: BTreeMap<usize, Restriction>,
}

impl ExtendedAlignmentTemplate {
    pub fn validate(&self) -> Result<()> {
        if self.sl_classes.is_empty() || self.tl_classes.is_empty() {
            return Err(Error::InvalidArgument("empty template side".into()));
        }
        for &(i, j) in &self.alignment {
            if i >= self.tl_classes.len() || j >= self.sl_classes.len() {
                return Err(Error::InvalidArgument(format!(
                    "alignment link ({i},{j}) outside the template"
                )));
            }
        }
        for (j, class) in self.sl_classes.iter().enumerate() {
            if !class.is_lexicalized() && !self.alignment.iter().any(|&(_, j2)| j2 == j) {
                return Err(Error::InvalidArgument(format!(
                    "non-lexicalized source class {j} is unaligned"
                )));
            }
        }
        for (i, class) in self.tl_classes.iter().enumerate() {
            if !class.is_lexicalized() && !self.alignment.iter().any(|&(i2, _)| i2 == i) {
                return Err(Error::InvalidArgument(format!(
                    "non-lexicalized target class {i} is unaligned"
                )));
            }
        }
        for &pos in self.restrictions.keys() {
            match self.tl_classes.get(pos) {
                Some(class) if !class.is_lexicalized() => {}
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "restriction on position {pos} does not name a \
                         non-lexicalized target class"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Lowest source position aligned to the given target position; the one
    /// that supplies the lemma at application time.
    pub fn aligned_source(&self, tl_pos: usize) -> Option<usize> {
        self.alignment
            .iter()
            .filter(|&&(i, _)| i == tl_pos)
            .map(|&(_, j)| j)
            .min()
    }

    /// Canonical single-line serialization; also the tie-break key wherever
    /// counts are equal.
    pub fn canonical_string(&self) -> String {
        render_record(self, None)
    }
}

/// A template with its corpus frequency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountedTemplate {
    pub template: ExtendedAlignmentTemplate,
    pub count: u64,
}

/// Why a phrase pair was not turned into a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardReason {
    /// A non-lexicalized word on either side has no alignment link.
    UnalignedNonLexicalized,
    /// The dictionary's translation disagrees with the observed one (or the
    /// word that must supply a lemma has no usable entry).
    NotReproducible,
}

impl fmt::Display for DiscardReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscardReason::UnalignedNonLexicalized => f.write_str("unaligned non-lexicalized word"),
            DiscardReason::NotReproducible => f.write_str("not reproducible by the dictionary"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generalized {
    Template(ExtendedAlignmentTemplate),
    Discarded(DiscardReason),
}

/// Generalizes one extracted phrase pair into an extended alignment
/// template, or discards it with a reason.
pub fn generalize(
    phrase: &BilingualPhrasePair,
    lexicalized_cats: &BTreeSet<String>,
    dict: &BilingualDictionary,
) -> Generalized {
    let sl_classes: Vec<WordClass> = phrase
        .source_tokens
        .iter()
        .map(|w| WordClass::of(w, lexicalized_cats))
        .collect();
    let tl_classes: Vec<WordClass> = phrase
        .target_tokens
        .iter()
        .map(|w| WordClass::of(w, lexicalized_cats))
        .collect();

    let sl_unaligned = sl_classes
        .iter()
        .enumerate()
        .any(|(j, c)| !c.is_lexicalized() && !phrase.links.iter().any(|&(_, j2)| j2 == j));
    let tl_unaligned = tl_classes
        .iter()
        .enumerate()
        .any(|(i, c)| !c.is_lexicalized() && !phrase.links.iter().any(|&(i2, _)| i2 == i));
    if sl_unaligned || tl_unaligned {
        return Generalized::Discarded(DiscardReason::UnalignedNonLexicalized);
    }

    if !reproducible(dict, phrase, lexicalized_cats) {
        return Generalized::Discarded(DiscardReason::NotReproducible);
    }

    let mut restrictions = BTreeMap::new();
    for (i, class) in tl_classes.iter().enumerate() {
        if class.is_lexicalized() {
            continue;
        }
        let j = phrase
            .links
            .iter()
            .filter(|&&(i2, _)| i2 == i)
            .map(|&(_, j)| j)
            .min()
            .expect("non-lexicalized target classes are aligned");
        // The aligned word is usually non-lexicalized and therefore already
        // known to the dictionary; a lexicalized word without an entry
        // cannot supply a lemma at application time.
        let Some(entry) = dict.entry_for(&phrase.source_tokens[j]) else {
            return Generalized::Discarded(DiscardReason::NotReproducible);
        };
        restrictions.insert(i, derive_restriction(entry));
    }

    Generalized::Template(ExtendedAlignmentTemplate {
        sl_classes,
        tl_classes,
        alignment: phrase.links.clone(),
        restrictions,
    })
}

/// Multiset counting under canonical template equality; the output is sorted
/// by descending count, ties by canonical serialization.
pub fn count_templates(
    templates: impl IntoIterator<Item = ExtendedAlignmentTemplate>,
) -> Vec<CountedTemplate> {
    let mut counts: BTreeMap<ExtendedAlignmentTemplate, u64> = BTreeMap::new();
    for template in templates {
        *counts.entry(template).or_insert(0) += 1;
    }
    let mut counted: Vec<CountedTemplate> = counts
        .into_iter()
        .map(|(template, count)| CountedTemplate { template, count })
        .collect();
    counted.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.template.canonical_string().cmp(&b.template.canonical_string()))
    });
    counted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Score a template by its raw frequency count.
    Raw,
    /// Score by the modified count c·(1 + log l), favoring longer templates.
    LengthScaled,
}

impl std::str::FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(SelectionMode::Raw),
            "length_scaled" => Ok(SelectionMode::LengthScaled),
            other => Err(Error::InvalidArgument(format!(
                "unknown selection mode {other:?}"
            ))),
        }
    }
}

/// The modified frequency count c·(1 + log l) where l is the source-side
/// length. The logarithm base is isolated here; natural log today.
pub fn modified_count(count: u64, source_len: usize) -> f64 {
    count as f64 * (1.0 + (source_len as f64).ln())
}

pub fn selection_score(counted: &CountedTemplate, mode: SelectionMode) -> f64 {
    match mode {
        SelectionMode::Raw => counted.count as f64,
        SelectionMode::LengthScaled => {
            modified_count(counted.count, counted.template.sl_classes.len())
        }
    }
}

/// Keeps the templates whose score reaches the threshold (inclusive),
/// preserving order.
pub fn select_templates(
    counted: &[CountedTemplate],
    threshold: f64,
    mode: SelectionMode,
) -> Vec<CountedTemplate> {
    counted
        .iter()
        .filter(|c| selection_score(c, mode) >= threshold)
        .cloned()
        .collect()
}

// ---------------------------------------------------------------------------
// Template dump format.
//
// One record per line: `S ||| T ||| A ||| R ||| count`, with class sequences
// rendered in the machine form, alignment links as `i-j` (target-source),
// and restrictions as `pos:<cat><tag>...*`. Field separators are recognized
// only outside stream tokens, so lemmas may contain anything.

pub const TEMPLATE_DUMP_HEADER: &str = "templates-format 1";
const FIELD_SEPARATOR: &str = " ||| ";

fn render_record(template: &ExtendedAlignmentTemplate, count: Option<u64>) -> String {
    let sl: Vec<String> = template.sl_classes.iter().map(WordClass::render).collect();
    let tl: Vec<String> = template.tl_classes.iter().map(WordClass::render).collect();
    let links: Vec<String> = template
        .alignment
        .iter()
        .map(|(i, j)| format!("{i}-{j}"))
        .collect();
    let restrictions: Vec<String> = template
        .restrictions
        .iter()
        .map(|(pos, r)| {
            let mut s = format!("{pos}:<{}>", r.category);
            for tag in &r.tag_prefix {
                s.push('<');
                s.push_str(tag);
                s.push('>');
            }
            s.push('*');
            s
        })
        .collect();
    let mut record = format!(
        "{}{FIELD_SEPARATOR}{}{FIELD_SEPARATOR}{}{FIELD_SEPARATOR}{}",
        sl.join(" "),
        tl.join(" "),
        links.join(" "),
        restrictions.join(" ")
    );
    if let Some(count) = count {
        record.push_str(FIELD_SEPARATOR);
        record.push_str(&count.to_string());
    }
    record
}

/// Serializes counted templates; `parse_templates` round-trips the result.
pub fn dump_templates(counted: &[CountedTemplate]) -> String {
    let mut out = String::from(TEMPLATE_DUMP_HEADER);
    out.push('\n');
    for c in counted {
        out.push_str(&render_record(&c.template, Some(c.count)));
        out.push('\n');
    }
    out
}

pub fn parse_templates(text: &str) -> Result<Vec<CountedTemplate>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#'))
        .peekable();
    match lines.next() {
        Some((_, header)) if header == TEMPLATE_DUMP_HEADER => {}
        Some((idx, other)) => {
            return Err(Error::Format {
                what: "template dump",
                line: idx + 1,
                message: format!("expected header {TEMPLATE_DUMP_HEADER:?}, found {other:?}"),
            });
        }
        None => {
            return Err(Error::Format {
                what: "template dump",
                line: 1,
                message: "empty file".into(),
            });
        }
    }

    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let record =
            parse_record(line, true).map_err(|e| Error::Format {
                what: "template dump",
                line: idx + 1,
                message: e.to_string(),
            })?;
        out.push(record);
    }
    Ok(out)
}

fn parse_record(line: &str, with_count: bool) -> Result<CountedTemplate> {
    let fields = split_fields(line)?;
    let expected = if with_count { 5 } else { 4 };
    if fields.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "expected {expected} '|||'-separated fields, found {}",
            fields.len()
        )));
    }

    let sl_classes = parse_class_sequence(&fields[0])?;
    let tl_classes = parse_class_sequence(&fields[1])?;
    let mut alignment = BTreeSet::new();
    for item in fields[2].split_whitespace() {
        let (i, j) = item
            .split_once('-')
            .ok_or_else(|| Error::InvalidArgument(format!("malformed link {item:?}")))?;
        let i: usize = i
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("malformed link {item:?}")))?;
        let j: usize = j
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("malformed link {item:?}")))?;
        alignment.insert((i, j));
    }
    let mut restrictions = BTreeMap::new();
    for item in fields[3].split_whitespace() {
        let (pos, pattern) = item
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("malformed restriction {item:?}")))?;
        let pos: usize = pos
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("malformed restriction {item:?}")))?;
        let inner = pattern.strip_suffix('*').ok_or_else(|| {
            Error::InvalidArgument(format!("restriction {item:?} must end with '*'"))
        })?;
        let mut scanner = Scanner::new(inner);
        let mut tags = Vec::new();
        while !scanner.at_end() {
            tags.push(scanner.tag(1)?);
        }
        if tags.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "restriction {item:?} has no category"
            )));
        }
        let category = tags.remove(0);
        restrictions.insert(
            pos,
            Restriction {
                category,
                tag_prefix: tags,
            },
        );
    }
    let count = if with_count {
        fields[4]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("malformed count {:?}", fields[4])))?
    } else {
        0
    };

    let template = ExtendedAlignmentTemplate {
        sl_classes,
        tl_classes,
        alignment,
        restrictions,
    };
    template.validate()?;
    Ok(CountedTemplate { template, count })
}

/// Splits on ` ||| ` occurring outside stream tokens, so separators inside
/// escaped lemmas do not count.
fn split_fields(line: &str) -> Result<Vec<String>> {
    let chars: Vec<char> = line.chars().collect();
    let sep: Vec<char> = FIELD_SEPARATOR.chars().collect();
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut in_token = false;
    let mut escaped = false;
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if in_token {
            current.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '$' {
                in_token = false;
            }
            k += 1;
            continue;
        }
        if c == '^' {
            in_token = true;
            current.push(c);
            k += 1;
            continue;
        }
        if chars[k..].starts_with(&sep) {
            fields.push(std::mem::take(&mut current));
            k += sep.len();
            continue;
        }
        current.push(c);
        k += 1;
    }
    fields.push(current);
    Ok(fields)
}

/// Splits a class sequence field on whitespace outside stream tokens and
/// parses each unit.
pub(crate) fn parse_class_sequence(field: &str) -> Result<Vec<WordClass>> {
    let chars: Vec<char> = field.chars().collect();
    let mut units = Vec::new();
    let mut current = String::new();
    let mut in_token = false;
    let mut escaped = false;
    for c in chars {
        if in_token {
            current.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '$' {
                in_token = false;
            }
            continue;
        }
        if c == '^' {
            in_token = true;
            current.push(c);
            continue;
        }
        if c.is_whitespace() {
            if !current.is_empty() {
                units.push(std::mem::take(&mut current));
            }
            continue;
        }
        current.push(c);
    }
    if !current.is_empty() {
        units.push(current);
    }
    units.iter().map(|u| WordClass::parse(u)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bidix::parse_dictionary;

    fn form(lemma: &str, category: &str, tags: &[&str]) -> LexicalForm {
        LexicalForm::new(lemma, category, tags.iter().copied()).unwrap()
    }

    fn morph(category: &str, tags: &[&str]) -> WordClass {
        WordClass::Morph {
            category: category.into(),
            inflection: tags.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn lexicalized(lemma: &str, category: &str, tags: &[&str]) -> WordClass {
        WordClass::Lexicalized(form(lemma, category, tags))
    }

    fn cats(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn toy_dict() -> BilingualDictionary {
        parse_dictionary(
            r#"<dic>
<e><p><l>vivir<s n="verb"/></l><r>viure<s n="verb"/></r></p></e>
<e><p><l>Francia<s n="noun"/></l><r>França<s n="noun"/></r></p></e>
<e><p><l>señal<s n="noun"/><s n="f"/></l><r>senyal<s n="noun"/><s n="m"/></r></p></e>
</dic>"#,
        )
        .unwrap()
    }

    #[test]
    fn word_class_mapping() {
        let lex = cats(&["pr"]);
        assert_eq!(
            WordClass::of(&form("en", "pr", &[]), &lex),
            lexicalized("en", "pr", &[])
        );
        assert_eq!(
            WordClass::of(&form("Francia", "noun", &["loc"]), &lex),
            morph("noun", &["loc"])
        );
        // Different lemmas, identical class.
        assert_eq!(
            WordClass::of(&form("book", "noun", &["sg"]), &lex),
            WordClass::of(&form("house", "noun", &["sg"]), &lex)
        );
    }

    fn figure_like_phrase() -> BilingualPhrasePair {
        // vivir-(verb.pret.3rd.pl) en-(pr) Francia-(noun.loc)
        //   -> anar-(vaux.pres.3rd.pl) viure-(verb.inf) a-(pr) França-(noun.loc)
        BilingualPhrasePair {
            source_start: 0,
            source_tokens: vec![
                form("vivir", "verb", &["pret", "3rd", "pl"]),
                form("en", "pr", &[]),
                form("Francia", "noun", &["loc"]),
            ],
            target_start: 0,
            target_tokens: vec![
                form("anar", "vaux", &["pres", "3rd", "pl"]),
                form("viure", "verb", &["inf"]),
                form("a", "pr", &[]),
                form("França", "noun", &["loc"]),
            ],
            links: BTreeSet::from([(0, 0), (1, 0), (2, 1), (3, 2)]),
        }
    }

    #[test]
    fn generalizes_the_periphrasis_phrase() {
        let lex = cats(&["pr", "vaux"]);
        let result = generalize(&figure_like_phrase(), &lex, &toy_dict());
        let Generalized::Template(t) = result else {
            panic!("expected a template, got {result:?}");
        };
        assert_eq!(
            t.sl_classes,
            vec![
                morph("verb", &["pret", "3rd", "pl"]),
                lexicalized("en", "pr", &[]),
                morph("noun", &["loc"]),
            ]
        );
        assert_eq!(
            t.tl_classes,
            vec![
                lexicalized("anar", "vaux", &["pres", "3rd", "pl"]),
                morph("verb", &["inf"]),
                lexicalized("a", "pr", &[]),
                morph("noun", &["loc"]),
            ]
        );
        assert_eq!(t.restrictions.len(), 2);
        assert_eq!(t.restrictions[&1].to_string(), "verb.*");
        assert_eq!(t.restrictions[&3].to_string(), "noun.*");
        t.validate().unwrap();
    }

    #[test]
    fn discards_phrase_with_unaligned_non_lexicalized_word() {
        let mut phrase = figure_like_phrase();
        phrase.links.remove(&(3, 2)); // Francia and França lose their link
        let result = generalize(&phrase, &cats(&["pr", "vaux"]), &toy_dict());
        assert_eq!(
            result,
            Generalized::Discarded(DiscardReason::UnalignedNonLexicalized)
        );
    }

    #[test]
    fn discards_phrase_the_dictionary_cannot_reproduce() {
        let mut phrase = figure_like_phrase();
        phrase.target_tokens[1] = form("habitar", "verb", &["inf"]);
        let result = generalize(&phrase, &cats(&["pr", "vaux"]), &toy_dict());
        assert_eq!(result, Generalized::Discarded(DiscardReason::NotReproducible));
    }

    #[test]
    fn counting_is_a_multiset_and_respects_restrictions() {
        let lex = cats(&["pr", "vaux"]);
        let dict = toy_dict();
        let Generalized::Template(z1) = generalize(&figure_like_phrase(), &lex, &dict) else {
            panic!()
        };
        let mut z2 = z1.clone();
        z2.restrictions.insert(
            1,
            Restriction {
                category: "verb".into(),
                tag_prefix: vec!["inf".into()],
            },
        );
        let counted = count_templates(vec![z1.clone(), z2.clone(), z1.clone()]);
        assert_eq!(counted.len(), 2);
        assert_eq!(counted[0].template, z1);
        assert_eq!(counted[0].count, 2);
        assert_eq!(counted[1].count, 1);
        assert!(count_templates(Vec::new()).is_empty());
    }

    #[test]
    fn selection_scores_and_threshold() {
        let lex = cats(&["pr", "vaux"]);
        let Generalized::Template(t) = generalize(&figure_like_phrase(), &lex, &toy_dict())
        else {
            panic!()
        };
        let counted = CountedTemplate {
            template: t,
            count: 10,
        };
        // l = 3: frozen from an independent evaluation of 10·(1 + ln 3).
        let score = selection_score(&counted, SelectionMode::LengthScaled);
        assert!((score - 20.986122886681102).abs() < 1e-12);
        assert_eq!(selection_score(&counted, SelectionMode::Raw), 10.0);

        let kept = select_templates(&[counted.clone()], 20.0, SelectionMode::LengthScaled);
        assert_eq!(kept.len(), 1);
        let kept = select_templates(&[counted.clone()], 20.0, SelectionMode::Raw);
        assert!(kept.is_empty());
        // Boundary is inclusive.
        let kept = select_templates(&[counted.clone()], 10.0, SelectionMode::Raw);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn unit_length_scores_collapse_to_raw() {
        let template = ExtendedAlignmentTemplate {
            sl_classes: vec![morph("noun", &["sg"])],
            tl_classes: vec![morph("noun", &["sg"])],
            alignment: BTreeSet::from([(0, 0)]),
            restrictions: BTreeMap::new(),
        };
        let counted = CountedTemplate { template, count: 7 };
        assert_eq!(
            selection_score(&counted, SelectionMode::LengthScaled),
            selection_score(&counted, SelectionMode::Raw)
        );
    }

    #[test]
    fn zero_threshold_raw_selection_is_identity_and_antitone() {
        let lex = cats(&["pr", "vaux"]);
        let Generalized::Template(t) = generalize(&figure_like_phrase(), &lex, &toy_dict())
        else {
            panic!()
        };
        let counted = count_templates(vec![t.clone(), t.clone(), t]);
        assert_eq!(
            select_templates(&counted, 0.0, SelectionMode::Raw),
            counted
        );
        let at_2 = select_templates(&counted, 2.0, SelectionMode::Raw);
        let at_5 = select_templates(&counted, 5.0, SelectionMode::Raw);
        assert!(at_5.iter().all(|c| at_2.contains(c)));
    }

    #[test]
    fn length_scaled_score_increases_with_length() {
        let mut last = 0.0;
        for l in 1..=7 {
            let score = modified_count(5, l);
            assert!(score > last || l == 1);
            last = score;
        }
    }

    #[test]
    fn dump_round_trips() {
        let lex = cats(&["pr", "vaux"]);
        let dict = toy_dict();
        let Generalized::Template(t) = generalize(&figure_like_phrase(), &lex, &dict) else {
            panic!()
        };
        let counted = vec![CountedTemplate {
            template: t,
            count: 17,
        }];
        let text = dump_templates(&counted);
        let parsed = parse_templates(&text).unwrap();
        assert_eq!(parsed, counted);
        // Byte determinism.
        assert_eq!(dump_templates(&parsed), text);
    }

    #[test]
    fn dump_survives_hostile_lemmas() {
        let template = ExtendedAlignmentTemplate {
            sl_classes: vec![
                lexicalized("a ||| b", "pr", &[]),
                morph("noun", &["sg"]),
            ],
            tl_classes: vec![lexicalized("x^y$z", "pr", &[]), morph("noun", &["sg"])],
            alignment: BTreeSet::from([(0, 0), (1, 1)]),
            restrictions: BTreeMap::from([(
                1,
                Restriction {
                    category: "noun".into(),
                    tag_prefix: vec!["m".into()],
                },
            )]),
        };
        let counted = vec![CountedTemplate { template, count: 3 }];
        let parsed = parse_templates(&dump_templates(&counted)).unwrap();
        assert_eq!(parsed, counted);
    }

    #[test]
    fn parse_rejects_malformed_records() {
        for body in [
            "only two ||| fields",
            "<noun> ||| <noun> ||| 0-0 ||| ||| not_a_number",
            "<noun> ||| <noun> ||| 0-5 |||  ||| 1",  // link out of range
            "<noun> ||| ^x<pr>$ ||| 0-0 ||| 0:<noun>* ||| 1", // restriction on lexicalized
        ] {
            let text = format!("{TEMPLATE_DUMP_HEADER}\n{body}\n");
            assert!(parse_templates(&text).is_err(), "accepted {body:?}");
        }
    }
}
