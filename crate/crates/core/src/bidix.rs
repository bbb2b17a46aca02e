//! The bilingual dictionary: XML parsing, SL-to-TL lookup, restriction
//! derivation, and the reproducibility test used to discard phrase pairs.
//!
//! The accepted XML is a deliberately small subset: a `<dic>` of
//! `<e><p><l>lemma<s n="tag"/>...</l><r>lemma<s n="tag"/>...</r></p></e>`
//! entries, the first `<s>` on each side being the lexical category. Only
//! inflection *changes* are coded explicitly; everything else carries over
//! from the source word.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::corpus::LexicalForm;
use crate::error::{Error, Result};
use crate::phrase::BilingualPhrasePair;

/// One dictionary entry. Both sides hold a lemma, a category and the
/// explicitly coded (partial) inflection tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictEntry {
    pub sl: LexicalForm,
    pub tl: LexicalForm,
}

/// SL-to-TL dictionary indexed by (lemma, category); at most one entry per
/// key, so rule application stays deterministic.
#[derive(Debug, Clone, Default)]
pub struct BilingualDictionary {
    pub direction: String,
    entries: BTreeMap<(String, String), (usize, DictEntry)>,
}

impl BilingualDictionary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DictEntry> {
        self.entries.values().map(|(_, e)| e)
    }

    /// The entry matching the word's (lemma, category) whose coded SL tags
    /// are a prefix of the word's inflection.
    pub fn entry_for(&self, sl: &LexicalForm) -> Option<&DictEntry> {
        let (_, entry) = self
            .entries
            .get(&(sl.lemma.clone(), sl.category.clone()))?;
        let prefix_ok = entry.sl.inflection.len() <= sl.inflection.len()
            && entry
                .sl
                .inflection
                .iter()
                .zip(&sl.inflection)
                .all(|(a, b)| a == b);
        prefix_ok.then_some(entry)
    }

    /// Translates a source lexical form. The result carries the TL lemma and
    /// category plus the source inflection with the entry's explicitly coded
    /// TL tags substituted positionally.
    pub fn lookup(&self, sl: &LexicalForm) -> Option<LexicalForm> {
        let entry = self.entry_for(sl)?;
        let mut inflection = sl.inflection.clone();
        for (slot, tag) in entry.tl.inflection.iter().enumerate() {
            if slot < inflection.len() {
                inflection[slot] = tag.clone();
            } else {
                inflection.push(tag.clone());
            }
        }
        Some(LexicalForm {
            lemma: entry.tl.lemma.clone(),
            category: entry.tl.category.clone(),
            inflection,
        })
    }

    pub fn contains(&self, sl: &LexicalForm) -> bool {
        self.entry_for(sl).is_some()
    }
}

/// Required TL category plus a tag prefix; the implicit trailing wildcard
/// matches any remaining inflection. Displayed as `category[.tag]*.*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Restriction {
    pub category: String,
    pub tag_prefix: Vec<String>,
}

impl Restriction {
    /// Did the dictionary translation satisfy this restriction?
    pub fn satisfied_by(&self, tl_category: &str, tl_tags: &[String]) -> bool {
        self.category == tl_category
            && self.tag_prefix.len() <= tl_tags.len()
            && self.tag_prefix.iter().zip(tl_tags).all(|(a, b)| a == b)
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.category)?;
        for tag in &self.tag_prefix {
            write!(f, ".{tag}")?;
        }
        write!(f, ".*")
    }
}

/// The restriction an entry imposes at translation time: its TL category
/// followed by its explicitly coded TL inflection tags.
pub fn derive_restriction(entry: &DictEntry) -> Restriction {
    Restriction {
        category: entry.tl.category.clone(),
        tag_prefix: entry.tl.inflection.clone(),
    }
}

/// True when the dictionary can reproduce the phrase pair's lexical choices:
/// every non-lexicalized source word must be found, and its translated lemma
/// must equal the lemma of every target word aligned to it.
pub fn reproducible(
    dict: &BilingualDictionary,
    phrase: &BilingualPhrasePair,
    lexicalized_cats: &BTreeSet<String>,
) -> bool {
    for (j, sl_word) in phrase.source_tokens.iter().enumerate() {
        if lexicalized_cats.contains(&sl_word.category) {
            continue;
        }
        let Some(translation) = dict.lookup(sl_word) else {
            return false;
        };
        for &(i, j2) in &phrase.links {
            if j2 == j && phrase.target_tokens[i].lemma != translation.lemma {
                return false;
            }
        }
    }
    true
}

/// Parses the dictionary XML subset. Later entries with an already-seen SL
/// (lemma, category) key are rejected, naming both entries.
pub fn parse_dictionary(xml: &str) -> Result<BilingualDictionary> {
    let mut reader = Reader::from_str(xml);
    let mut dict = BilingualDictionary {
        direction: "sl->tl".into(),
        ..Default::default()
    };
    let mut index = 0usize;

    // Find the <dic> root.
    loop {
        match read_skipping(&mut reader)? {
            Event::Start(e) if e.name().as_ref() == b"dic" => break,
            Event::Empty(e) if e.name().as_ref() == b"dic" => {
                expect_eof(&mut reader)?;
                return Ok(dict);
            }
            Event::Eof => {
                return Err(Error::DictionaryFormat("missing <dic> root".into()));
            }
            other => {
                return Err(Error::DictionaryFormat(format!(
                    "expected <dic> root, found {other:?}"
                )));
            }
        }
    }

    loop {
        match read_skipping(&mut reader)? {
            Event::Start(e) if e.name().as_ref() == b"e" => {
                index += 1;
                let entry = parse_entry(&mut reader, index)?;
                let key = (entry.sl.lemma.clone(), entry.sl.category.clone());
                if let Some((first_index, _)) = dict.entries.get(&key) {
                    return Err(Error::Dictionary {
                        index,
                        message: format!(
                            "duplicate entry for ({}, {}): already defined by entry {first_index}",
                            key.0, key.1
                        ),
                    });
                }
                dict.entries.insert(key, (index, entry));
            }
            Event::End(e) if e.name().as_ref() == b"dic" => break,
            Event::Eof => {
                return Err(Error::DictionaryFormat("unclosed <dic>".into()));
            }
            other => {
                return Err(Error::Dictionary {
                    index: index + 1,
                    message: format!("expected <e>, found {other:?}"),
                });
            }
        }
    }
    expect_eof(&mut reader)?;
    Ok(dict)
}

fn read_skipping<'a>(reader: &mut Reader<&'a [u8]>) -> Result<Event<'a>> {
    loop {
        let event = reader
            .read_event()
            .map_err(|e| Error::DictionaryFormat(format!("malformed XML: {e}")))?;
        match event {
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) => continue,
            Event::Text(ref t) => {
                let text = t
                    .unescape()
                    .map_err(|e| Error::DictionaryFormat(format!("malformed XML text: {e}")))?;
                if text.trim().is_empty() {
                    continue;
                }
                return Ok(event);
            }
            _ => return Ok(event),
        }
    }
}

fn expect_eof(reader: &mut Reader<&[u8]>) -> Result<()> {
    match read_skipping(reader)? {
        Event::Eof => Ok(()),
        other => Err(Error::DictionaryFormat(format!(
            "trailing content after </dic>: {other:?}"
        ))),
    }
}

fn parse_entry(reader: &mut Reader<&[u8]>, index: usize) -> Result<DictEntry> {
    let fail = |message: String| Error::Dictionary { index, message };

    match read_skipping(reader)? {
        Event::Start(e) if e.name().as_ref() == b"p" => {}
        other => return Err(fail(format!("expected <p>, found {other:?}"))),
    }
    let sl = parse_side(reader, index, b"l")?;
    let tl = parse_side(reader, index, b"r")?;
    match read_skipping(reader)? {
        Event::End(e) if e.name().as_ref() == b"p" => {}
        other => return Err(fail(format!("expected </p>, found {other:?}"))),
    }
    match read_skipping(reader)? {
        Event::End(e) if e.name().as_ref() == b"e" => {}
        other => return Err(fail(format!("expected </e>, found {other:?}"))),
    }
    Ok(DictEntry { sl, tl })
}

fn parse_side(reader: &mut Reader<&[u8]>, index: usize, which: &[u8]) -> Result<LexicalForm> {
    let side = String::from_utf8_lossy(which).into_owned();
    let fail = |message: String| Error::Dictionary { index, message };

    match read_skipping(reader)? {
        Event::Start(e) if e.name().as_ref() == which => {}
        other => return Err(fail(format!("expected <{side}>, found {other:?}"))),
    }

    let mut lemma = String::new();
    let mut tags: Vec<String> = Vec::new();
    loop {
        let event = reader
            .read_event()
            .map_err(|e| fail(format!("malformed XML: {e}")))?;
        match event {
            Event::Text(t) => {
                let text = t
                    .unescape()
                    .map_err(|e| fail(format!("malformed XML text: {e}")))?;
                lemma.push_str(&text);
            }
            ref ev @ (Event::Empty(ref e) | Event::Start(ref e))
                if e.name().as_ref() == b"s" =>
            {
                let is_empty = matches!(ev, Event::Empty(_));
                let attr = e
                    .try_get_attribute("n")
                    .map_err(|err| fail(format!("bad <s> attribute: {err}")))?
                    .ok_or_else(|| fail(format!("<s> without n attribute in <{side}>")))?;
                let value = attr
                    .unescape_value()
                    .map_err(|err| fail(format!("bad <s> attribute: {err}")))?;
                tags.push(value.into_owned());
                if !is_empty {
                    match read_skipping(reader)? {
                        Event::End(e) if e.name().as_ref() == b"s" => {}
                        other => return Err(fail(format!("expected </s>, found {other:?}"))),
                    }
                }
            }
            Event::End(e) if e.name().as_ref() == which => break,
            Event::Comment(_) => continue,
            other => return Err(fail(format!("unexpected {other:?} in <{side}>"))),
        }
    }

    let lemma = lemma.trim().to_string();
    if lemma.is_empty() {
        return Err(fail(format!("missing lemma in <{side}>")));
    }
    if tags.is_empty() {
        return Err(fail(format!("missing category <s> in <{side}>")));
    }
    let category = tags.remove(0);
    LexicalForm::new(lemma, category, tags)
        .map_err(|e| fail(format!("invalid lexical form in <{side}>: {e}")))
}

/// Renders a dictionary entry list back into the accepted XML subset; used
/// by the fixture generator and handy for authoring toy dictionaries.
pub fn dictionary_xml(entries: &[DictEntry]) -> String {
    fn side(out: &mut String, tag: &str, form: &LexicalForm) {
        out.push_str(&format!("<{tag}>"));
        out.push_str(&quick_xml::escape::escape(&form.lemma));
        out.push_str(&format!("<s n=\"{}\"/>", quick_xml::escape::escape(&form.category)));
        for t in &form.inflection {
            out.push_str(&format!("<s n=\"{}\"/>", quick_xml::escape::escape(t)));
        }
        out.push_str(&format!("</{tag}>"));
    }
    let mut out = String::from("<dic>\n");
    for entry in entries {
        out.push_str("<e><p>");
        side(&mut out, "l", &entry.sl);
        side(&mut out, "r", &entry.tl);
        out.push_str("</p></e>\n");
    }
    out.push_str("</dic>\n");
    out
}
