//! Seed lexicon files.
//!
//! ```toml
//! [aspects]
//! food = ["pizza", "pasta", "sushi"]
//! service = ["waiter", "staff"]
//!
//! [polarities]
//! pos = ["good", "great"]
//! neg = ["bad", "awful"]
//!
//! # written by seed enhancement; optional on input
//! [derived]
//! food = ["martinis"]
//! ```
//!
//! Aspect order in the file is the aspect index order.

use std::collections::BTreeSet;
use std::path::Path;

use toml::{Table, Value};

use super::{read_text, tokenize, CorpusError, Polarity};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLexicon {
    /// `(aspect name, initial seeds)` in file order.
    pub aspects: Vec<(String, Vec<String>)>,
    /// Seeds for each polarity, indexed by [`Polarity::index`].
    pub polarities: [Vec<String>; 2],
    /// Additional seeds per aspect, same order as `aspects`.
    pub derived: Vec<Vec<String>>,
}

fn err(message: impl Into<String>) -> CorpusError {
    CorpusError::Seeds(message.into())
}

fn normalize_seed(raw: &str, context: &str) -> Result<String, CorpusError> {
    let tokens = tokenize(raw);
    match tokens.as_slice() {
        [single] => Ok(single.surface.clone()),
        [] => Err(err(format!("{context}: empty seed word"))),
        _ => Err(err(format!("{context}: seed `{raw}` is not a single token"))),
    }
}

fn word_list(value: &Value, context: &str) -> Result<Vec<String>, CorpusError> {
    let items = value
        .as_array()
        .ok_or_else(|| err(format!("{context}: expected a list of words")))?;
    let mut seen = BTreeSet::new();
    let mut words = Vec::with_capacity(items.len());
    for item in items {
        let raw = item
            .as_str()
            .ok_or_else(|| err(format!("{context}: seed words must be strings")))?;
        let word = normalize_seed(raw, context)?;
        if !seen.insert(word.clone()) {
            return Err(err(format!("{context}: duplicate seed `{word}`")));
        }
        words.push(word);
    }
    Ok(words)
}

fn section<'a>(table: &'a Table, name: &str) -> Result<Option<&'a Table>, CorpusError> {
    match table.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(err(format!("`{name}` must be a section"))),
    }
}

impl SeedLexicon {
    pub fn new(
        aspects: Vec<(String, Vec<String>)>,
        polarities: [Vec<String>; 2],
    ) -> Result<Self, CorpusError> {
        let derived = vec![Vec::new(); aspects.len()];
        let lexicon = Self {
            aspects,
            polarities,
            derived,
        };
        lexicon.validate()?;
        Ok(lexicon)
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let table: Table = text.parse().map_err(|e| err(format!("{e}")))?;
        for key in table.keys() {
            if !matches!(key.as_str(), "aspects" | "polarities" | "derived") {
                return Err(err(format!("unknown section `{key}`")));
            }
        }
        let aspect_table =
            section(&table, "aspects")?.ok_or_else(|| err("missing `aspects` section"))?;
        let mut aspects = Vec::new();
        for (name, words) in aspect_table {
            aspects.push((name.clone(), word_list(words, &format!("aspect `{name}`"))?));
        }

        let polarity_table =
            section(&table, "polarities")?.ok_or_else(|| err("missing `polarities` section"))?;
        let mut polarities: [Option<Vec<String>>; 2] = [None, None];
        for (name, words) in polarity_table {
            let polarity: Polarity = name.parse().map_err(err)?;
            let slot = &mut polarities[polarity.index()];
            if slot.is_some() {
                return Err(err(format!("polarity `{polarity}` given twice")));
            }
            *slot = Some(word_list(words, &format!("polarity `{name}`"))?);
        }
        let [pos, neg] = polarities;
        let polarities = [
            pos.ok_or_else(|| err("missing `pos` polarity seeds"))?,
            neg.ok_or_else(|| err("missing `neg` polarity seeds"))?,
        ];

        let mut derived = vec![Vec::new(); aspects.len()];
        if let Some(derived_table) = section(&table, "derived")? {
            for (name, words) in derived_table {
                let idx = aspects
                    .iter()
                    .position(|(a, _)| a == name)
                    .ok_or_else(|| err(format!("derived seeds for unknown aspect `{name}`")))?;
                derived[idx] = word_list(words, &format!("derived `{name}`"))?;
            }
        }

        let lexicon = Self {
            aspects,
            polarities,
            derived,
        };
        lexicon.validate()?;
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::parse(&read_text(path)?)
    }

    fn validate(&self) -> Result<(), CorpusError> {
        if self.aspects.len() < 2 {
            return Err(err(format!(
                "need at least 2 aspects, found {}",
                self.aspects.len()
            )));
        }
        let mut names = BTreeSet::new();
        for (name, words) in &self.aspects {
            if !names.insert(name) {
                return Err(err(format!("aspect `{name}` given twice")));
            }
            if words.is_empty() {
                return Err(err(format!("aspect `{name}` has no seed words")));
            }
        }
        for p in Polarity::ALL {
            if self.polarities[p.index()].is_empty() {
                return Err(err(format!("polarity `{p}` has no seed words")));
            }
        }
        if self.derived.len() != self.aspects.len() {
            return Err(err("derived seeds do not line up with aspects"));
        }
        let mut owner = std::collections::BTreeMap::new();
        for (i, words) in self.derived.iter().enumerate() {
            for w in words {
                if let Some(prev) = owner.insert(w, i) {
                    if prev != i {
                        return Err(err(format!("derived seed `{w}` assigned to two aspects")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn aspect_names(&self) -> Vec<String> {
        self.aspects.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn to_toml(&self) -> String {
        let list = |words: &[String]| {
            Value::Array(words.iter().map(|w| Value::String(w.clone())).collect())
        };
        let mut aspects = Table::new();
        for (name, words) in &self.aspects {
            aspects.insert(name.clone(), list(words));
        }
        let mut polarities = Table::new();
        for p in Polarity::ALL {
            polarities.insert(
                p.as_str().to_lowercase(),
                list(&self.polarities[p.index()]),
            );
        }
        let mut root = Table::new();
        root.insert("aspects".into(), Value::Table(aspects));
        root.insert("polarities".into(), Value::Table(polarities));
        if self.derived.iter().any(|d| !d.is_empty()) {
            let mut derived = Table::new();
            for ((name, _), words) in self.aspects.iter().zip(&self.derived) {
                if !words.is_empty() {
                    derived.insert(name.clone(), list(words));
                }
            }
            root.insert("derived".into(), Value::Table(derived));
        }
        toml::to_string(&root).expect("seed lexicon serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[aspects]
food = ["Pizza", "pasta"]
service = ["waiter"]

[polarities]
pos = ["good"]
negative = ["bad"]
"#;

    #[test]
    fn parses_in_file_order() {
        let lex = SeedLexicon::parse(SAMPLE).unwrap();
        assert_eq!(lex.aspect_names(), vec!["food", "service"]);
        assert_eq!(lex.aspects[0].1, vec!["pizza", "pasta"]);
        assert_eq!(lex.polarities[Polarity::Neg.index()], vec!["bad"]);
        assert!(lex.derived.iter().all(Vec::is_empty));
    }

    #[test]
    fn round_trips_with_derived() {
        let mut lex = SeedLexicon::parse(SAMPLE).unwrap();
        lex.derived[1] = vec!["staff".into()];
        let text = lex.to_toml();
        assert!(text.contains("[derived]"));
        assert_eq!(SeedLexicon::parse(&text).unwrap(), lex);
    }

    #[test]
    fn rejects_invalid_lexicons() {
        let cases = [
            "[aspects]\nfood=[\"pizza\"]\n[polarities]\npos=[\"good\"]\nneg=[\"bad\"]\n",
            "[aspects]\nfood=[\"pizza\",\"pizza\"]\nservice=[\"waiter\"]\n[polarities]\npos=[\"good\"]\nneg=[\"bad\"]\n",
            "[aspects]\nfood=[]\nservice=[\"waiter\"]\n[polarities]\npos=[\"good\"]\nneg=[\"bad\"]\n",
            "[aspects]\nfood=[\"pizza\"]\nservice=[\"waiter\"]\n[polarities]\npos=[\"good\"]\n",
            "[aspects]\nfood=[\"hot dog\"]\nservice=[\"waiter\"]\n[polarities]\npos=[\"good\"]\nneg=[\"bad\"]\n",
            "[aspects]\nfood=[\"pizza\"]\nservice=[\"waiter\"]\n[polarities]\npos=[\"good\"]\nneg=[\"bad\"]\n[derived]\ndrinks=[\"wine\"]\n",
            "[aspects]\nfood=[\"pizza\"]\nservice=[\"waiter\"]\n[polarities]\npos=[\"good\"]\nneg=[\"bad\"]\n[extra]\n",
        ];
        for case in cases {
            assert!(SeedLexicon::parse(case).is_err(), "{case}");
        }
    }
}
