//! Planted restaurant-review data for demos and end-to-end tests.
//!
//! Five aspects each own three seed nouns, six core nouns, three
//! secondary nouns, four verbs and four sentiment adjectives; two general
//! adjectives per polarity double as polarity seeds. Seeded sentences mention a seed (often with a core
//! noun); unseeded sentences use only core and secondary nouns, so the
//! initial seeds label them through word vectors alone. Those nouns end up
//! under several temporary labels and in low-connection sentences, which
//! is exactly where seed enhancement has work to do.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Polarity;

struct AspectVocab {
    name: &'static str,
    seeds: [&'static str; 3],
    core: [&'static str; 6],
    secondary: [&'static str; 3],
    verbs: [&'static str; 4],
    praise: [&'static str; 2],
    complaints: [&'static str; 2],
}

const ASPECTS: [AspectVocab; 5] = [
    AspectVocab {
        name: "food",
        seeds: ["pizza", "pasta", "sushi"],
        core: ["burger", "salad", "steak", "noodles", "dessert", "soup"],
        secondary: ["risotto", "dumplings", "tacos"],
        verbs: ["cooked", "seasoned", "grilled", "baked"],
        praise: ["delicious", "tasty"],
        complaints: ["bland", "stale"],
    },
    AspectVocab {
        name: "service",
        seeds: ["waiter", "staff", "service"],
        core: ["waitress", "server", "manager", "host", "bartender", "hostess"],
        secondary: ["attendant", "busboy", "concierge"],
        verbs: ["greeted", "seated", "attended", "answered"],
        praise: ["friendly", "attentive"],
        complaints: ["rude", "slow"],
    },
    AspectVocab {
        name: "ambience",
        seeds: ["atmosphere", "decor", "music"],
        core: ["lighting", "interior", "patio", "furniture", "view", "vibe"],
        secondary: ["chandelier", "fireplace", "mural"],
        verbs: ["decorated", "lit", "designed", "arranged"],
        praise: ["cozy", "charming"],
        complaints: ["noisy", "dingy"],
    },
    AspectVocab {
        name: "price",
        seeds: ["price", "prices", "bill"],
        core: ["cost", "value", "charge", "deal", "discount", "tip"],
        secondary: ["surcharge", "coupon", "invoice"],
        verbs: ["charged", "paid", "priced", "billed"],
        praise: ["cheap", "fair"],
        complaints: ["expensive", "overpriced"],
    },
    AspectVocab {
        name: "drinks",
        seeds: ["wine", "beer", "cocktails"],
        core: ["coffee", "tea", "martini", "juice", "lemonade", "whiskey"],
        secondary: ["sangria", "mojito", "espresso"],
        verbs: ["poured", "mixed", "brewed", "chilled"],
        praise: ["refreshing", "smooth"],
        complaints: ["watery", "flat"],
    },
];

/// General sentiment words; these double as the polarity seeds.
const POSITIVE: [&str; 2] = ["good", "great"];
const NEGATIVE: [&str; 2] = ["bad", "awful"];
const POSITIVE_TAILS: [&str; 2] = ["highly recommended", "we will return"];
const NEGATIVE_TAILS: [&str; 2] = ["never again", "we will not return"];
const GENERIC_NOUNS: [&str; 4] = ["place", "night", "evening", "visit"];
const OFF_TOPIC_NOUNS: [&str; 6] = ["traffic", "weather", "car", "train", "phone", "movie"];
const OFF_TOPIC_VERBS: [&str; 4] = ["drove", "watched", "called", "waited"];
const INTENSIFIERS: [&str; 4] = ["really", "very", "quite", "so"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub in_domain: usize,
    pub bank: usize,
    pub test: usize,
    /// Share of sentences that contain an initial seed word.
    pub seeded_fraction: f64,
    /// Share of bank sentences about none of the aspects.
    pub off_topic_fraction: f64,
    /// Two-aspect sentences added to the test file (dropped at evaluation).
    pub multi_aspect_test: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            in_domain: 200,
            bank: 2000,
            test: 300,
            seeded_fraction: 0.5,
            off_topic_fraction: 0.2,
            multi_aspect_test: 10,
        }
    }
}

/// One generated sentence with its planted labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSentence {
    pub tokens: Vec<String>,
    /// `None` for off-topic sentences.
    pub aspect: Option<usize>,
    pub polarity: Polarity,
    /// Token ranges of aspect nouns.
    pub terms: Vec<(usize, usize)>,
}

impl PlantedSentence {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub in_domain: Vec<PlantedSentence>,
    pub bank: Vec<PlantedSentence>,
    pub test: Vec<PlantedSentence>,
    /// Test lines about two aspects.
    pub multi_aspect: Vec<(String, [usize; 2])>,
}

pub fn aspect_names() -> Vec<String> {
    ASPECTS.iter().map(|a| a.name.to_string()).collect()
}

struct Builder {
    tokens: Vec<String>,
    terms: Vec<(usize, usize)>,
}

impl Builder {
    fn new() -> Self {
        Self {
            tokens: Vec::new(),
            terms: Vec::new(),
        }
    }

    fn words(&mut self, text: &str) {
        self.tokens.extend(text.split(' ').map(str::to_string));
    }

    fn term(&mut self, noun: &str) {
        self.terms.push((self.tokens.len(), self.tokens.len() + 1));
        self.tokens.push(noun.to_string());
    }
}

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().expect("non-empty word list")
}

fn general_sentiment<R: Rng>(rng: &mut R, polarity: Polarity) -> &'static str {
    match polarity {
        Polarity::Pos => pick(rng, &POSITIVE),
        Polarity::Neg => pick(rng, &NEGATIVE),
    }
}

/// An aspect-specific adjective, sometimes paired with a general one.
fn sentiment<R: Rng>(rng: &mut R, v: &AspectVocab, polarity: Polarity) -> String {
    let specific = match polarity {
        Polarity::Pos => pick(rng, &v.praise),
        Polarity::Neg => pick(rng, &v.complaints),
    };
    match rng.gen_range(0..3) {
        0 => general_sentiment(rng, polarity).to_string(),
        1 => specific.to_string(),
        _ => format!("{} and {specific}", general_sentiment(rng, polarity)),
    }
}

fn rich_clause<R: Rng>(rng: &mut R, b: &mut Builder, v: &AspectVocab, polarity: Polarity, first: &str, second: Option<&str>) {
    let adj = sentiment(rng, v, polarity);
    let verb = pick(rng, &v.verbs);
    match rng.gen_range(0..4) {
        0 => {
            b.words("the");
            b.term(first);
            if let Some(s) = second {
                b.words("and the");
                b.term(s);
                b.words("were");
            } else {
                b.words("was");
            }
            b.words(&format!("{verb} {} {adj}", pick(rng, &INTENSIFIERS)));
        }
        1 => {
            b.words("we had the");
            b.term(first);
            b.words(&format!("{verb} here and it was {adj}"));
            if let Some(s) = second {
                b.words(", the");
                b.term(s);
                b.words("too");
            }
        }
        2 => {
            b.words(&adj);
            b.term(first);
            b.words(&format!(", {verb} just right"));
            if let Some(s) = second {
                b.words("and the");
                b.term(s);
                b.words("as well");
            }
        }
        _ => {
            b.words("i thought the");
            b.term(first);
            b.words(&format!("was {verb} and {adj}"));
            if let Some(s) = second {
                b.words("but the");
                b.term(s);
                b.words(&format!("was {} too", sentiment(rng, v, polarity)));
            }
        }
    }
}

fn aspect_sentence<R: Rng>(rng: &mut R, aspect: usize, seeded: bool) -> PlantedSentence {
    let v = &ASPECTS[aspect];
    let polarity = if rng.gen_bool(0.6) { Polarity::Pos } else { Polarity::Neg };
    let first = if seeded {
        pick(rng, &v.seeds)
    } else if rng.gen_bool(0.5) {
        pick(rng, &v.secondary)
    } else {
        pick(rng, &v.core)
    };
    let second = if rng.gen_bool(0.4) {
        let pool: Vec<&str> = if seeded {
            v.core.to_vec()
        } else {
            v.core.iter().chain(&v.secondary).copied().collect()
        };
        Some(pick(rng, &pool)).filter(|w| *w != first)
    } else {
        None
    };
    let mut b = Builder::new();
    rich_clause(rng, &mut b, v, polarity, first, second);
    match rng.gen_range(0..6) {
        0 => b.words(&format!("that {}", pick(rng, &GENERIC_NOUNS))),
        1 | 2 => {
            let tails = match polarity {
                Polarity::Pos => &POSITIVE_TAILS,
                Polarity::Neg => &NEGATIVE_TAILS,
            };
            b.words(&format!(", {}", pick(rng, tails)));
        }
        _ => {}
    }
    b.words(".");
    PlantedSentence {
        tokens: b.tokens,
        aspect: Some(aspect),
        polarity,
        terms: b.terms,
    }
}

fn off_topic_sentence<R: Rng>(rng: &mut R) -> PlantedSentence {
    let polarity = if rng.gen_bool(0.5) { Polarity::Pos } else { Polarity::Neg };
    let text = format!(
        "the {} was {} and we {} for hours .",
        pick(rng, &OFF_TOPIC_NOUNS),
        general_sentiment(rng, polarity),
        pick(rng, &OFF_TOPIC_VERBS)
    );
    PlantedSentence {
        tokens: text.split(' ').map(str::to_string).collect(),
        aspect: None,
        polarity,
        terms: Vec::new(),
    }
}

fn aspect_sentences<R: Rng>(rng: &mut R, n: usize, seeded_fraction: f64) -> Vec<PlantedSentence> {
    (0..n)
        .map(|i| {
            let seeded = rng.gen_bool(seeded_fraction);
            aspect_sentence(rng, i % ASPECTS.len(), seeded)
        })
        .collect()
}

pub fn generate(cfg: &SyntheticConfig) -> SyntheticDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut in_domain = aspect_sentences(&mut rng, cfg.in_domain, cfg.seeded_fraction);
    in_domain.shuffle(&mut rng);
    let mut bank: Vec<PlantedSentence> = (0..cfg.bank)
        .map(|i| {
            if rng.gen_bool(cfg.off_topic_fraction) {
                off_topic_sentence(&mut rng)
            } else {
                let seeded = rng.gen_bool(cfg.seeded_fraction);
                aspect_sentence(&mut rng, i % ASPECTS.len(), seeded)
            }
        })
        .collect();
    bank.shuffle(&mut rng);
    let mut test = aspect_sentences(&mut rng, cfg.test, cfg.seeded_fraction);
    test.shuffle(&mut rng);
    let multi_aspect = (0..cfg.multi_aspect_test)
        .map(|i| {
            let a = i % ASPECTS.len();
            let b = (a + 1 + i / ASPECTS.len()) % ASPECTS.len();
            let text = format!(
                "the {} was {} but the {} was {} .",
                pick(&mut rng, &ASPECTS[a].core),
                pick(&mut rng, &ASPECTS[a].praise),
                pick(&mut rng, &ASPECTS[b].core),
                pick(&mut rng, &ASPECTS[b].complaints)
            );
            (text, [a, b])
        })
        .collect();
    SyntheticDataset {
        in_domain,
        bank,
        test,
        multi_aspect,
    }
}

impl SyntheticDataset {
    pub fn corpus_text(sentences: &[PlantedSentence]) -> String {
        sentences.iter().map(|s| s.text() + "\n").collect()
    }

    /// `sentence<TAB>aspect<TAB>start:end:polarity ...`
    pub fn test_text(&self) -> String {
        let names = aspect_names();
        let mut out = String::new();
        for s in &self.test {
            let spans: Vec<String> = s
                .terms
                .iter()
                .map(|(a, b)| format!("{a}:{b}:{}", s.polarity.as_str()))
                .collect();
            let _ = writeln!(out, "{}\t{}\t{}", s.text(), names[s.aspect.expect("test sentences have aspects")], spans.join(" "));
        }
        for (text, [a, b]) in &self.multi_aspect {
            let _ = writeln!(out, "{text}\t{},{}", names[*a], names[*b]);
        }
        out
    }
}

pub fn seeds_toml() -> String {
    let mut out = String::from("[aspects]\n");
    for a in &ASPECTS {
        let _ = writeln!(out, "{} = {:?}", a.name, a.seeds);
    }
    out.push_str("\n[polarities]\n");
    let _ = writeln!(out, "pos = {:?}", POSITIVE);
    let _ = writeln!(out, "neg = {:?}", NEGATIVE);
    out
}

/// Tags for every planted word, in the tagger's TSV format.
pub fn pos_lexicon_tsv() -> String {
    let mut out = String::from("# synthetic vocabulary\n");
    let mut add = |w: &str, tag: &str| {
        let _ = writeln!(out, "{w}\t{tag}");
    };
    for a in &ASPECTS {
        for w in a.seeds.iter().chain(&a.core).chain(&a.secondary) {
            add(w, "NOUN");
        }
        for w in &a.verbs {
            add(w, "VERB");
        }
        for w in a.praise.iter().chain(&a.complaints) {
            add(w, "ADJ");
        }
    }
    for w in POSITIVE.iter().chain(&NEGATIVE) {
        add(w, "ADJ");
    }
    for w in GENERIC_NOUNS.iter().chain(&OFF_TOPIC_NOUNS) {
        add(w, "NOUN");
    }
    for w in &OFF_TOPIC_VERBS {
        add(w, "VERB");
    }
    for w in ["highly", "just", "right"] {
        add(w, "OTHER");
    }
    out
}

/// Pipeline settings sized for the synthetic data.
pub fn config_toml() -> String {
    r#"[paths]
corpus = "in_domain.txt"
bank = "bank.txt"
test = "test.tsv"
seeds = "seeds.toml"
pos_lexicon = "pos_lexicon.tsv"
output = "out"

[embedding]
dim = 50
epochs = 50
window = 2
negatives = 5
min_count = 1

[filter]
gamma = 60.0

[retrieval]
k = 10

[classifier]
epochs = 10
learning_rate = 0.01
window_dim = 16
hidden_dim = 32

[run]
seeds = [1]
"#
    .to_string()
}

/// Writes the dataset and a ready-to-run config into `dir`; returns the config path.
pub fn write_dataset(dir: &Path, cfg: &SyntheticConfig) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let data = generate(cfg);
    fs::write(dir.join("in_domain.txt"), SyntheticDataset::corpus_text(&data.in_domain))?;
    fs::write(dir.join("bank.txt"), SyntheticDataset::corpus_text(&data.bank))?;
    fs::write(dir.join("test.tsv"), data.test_text())?;
    fs::write(dir.join("seeds.toml"), seeds_toml())?;
    fs::write(dir.join("pos_lexicon.tsv"), pos_lexicon_tsv())?;
    let config = dir.join("config.toml");
    fs::write(&config, config_toml())?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_labeled, tokenize, LexiconTagger, SeedLexicon};

    #[test]
    fn sizes_and_determinism() {
        let cfg = SyntheticConfig::default();
        let a = generate(&cfg);
        assert_eq!(a.in_domain.len(), 200);
        assert_eq!(a.bank.len(), 2000);
        assert_eq!(a.test.len(), 300);
        let b = generate(&cfg);
        assert_eq!(a.test_text(), b.test_text());
        assert_eq!(SyntheticDataset::corpus_text(&a.bank), SyntheticDataset::corpus_text(&b.bank));
    }

    #[test]
    fn planted_text_survives_tokenization() {
        let data = generate(&SyntheticConfig::default());
        for s in data.in_domain.iter().chain(&data.test) {
            let toks: Vec<String> = tokenize(&s.text()).into_iter().map(|t| t.surface).collect();
            assert_eq!(toks, s.tokens);
            assert!(!s.terms.is_empty());
        }
    }

    #[test]
    fn unseeded_sentences_have_no_seed_words() {
        let cfg = SyntheticConfig {
            seeded_fraction: 0.0,
            ..Default::default()
        };
        let seeds: Vec<&str> = ASPECTS.iter().flat_map(|a| a.seeds).collect();
        for s in generate(&cfg).in_domain {
            assert!(s.tokens.iter().all(|t| !seeds.contains(&t.as_str())), "{}", s.text());
        }
    }

    #[test]
    fn generated_files_parse() {
        let data = generate(&SyntheticConfig::default());
        let mut tagger = LexiconTagger::bundled();
        tagger.extend(LexiconTagger::from_tsv(&pos_lexicon_tsv()).unwrap());
        let set = parse_labeled(&data.test_text(), &tagger).unwrap();
        assert_eq!(set.items.len(), 300);
        assert_eq!(set.dropped_multi_aspect, 10);
        let seeds = SeedLexicon::parse(&seeds_toml()).unwrap();
        assert_eq!(seeds.aspect_names(), aspect_names());
    }
}
