use serde::{Deserialize, Serialize};

use super::{
    predict, train, ClassifierError, FrozenEmbeddingEncoder, MultitaskConfig, MultitaskModel, Prediction, TrainReport,
    TrainingExample, WindowEncoder,
};
use crate::embedding::EmbeddingTable;
use crate::pseudolabel::bio::{join_tags, parse_tags, PolarityTag, TermTag};

pub const CHECKPOINT_VERSION: u32 = 1;

const MISSING: &str = "-";

/// One sentence per line: tokens, aspect name, term BIO, polarity BIO.
/// Missing token labels are written as `-`.
pub fn training_export(examples: &[TrainingExample], aspects: &[String]) -> String {
    let mut out = String::new();
    for ex in examples {
        let terms = ex.term_tags.as_deref().map_or(MISSING.to_string(), join_tags);
        let pols = ex.polarity_tags.as_deref().map_or(MISSING.to_string(), join_tags);
        out.push_str(&format!("{}\t{}\t{}\t{}\n", ex.tokens.join(" "), aspects[ex.acd], terms, pols));
    }
    out
}

pub fn parse_training_export(text: &str, aspects: &[String]) -> Result<Vec<TrainingExample>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(format!("line {}: expected 4 fields, found {}", i + 1, fields.len()));
        }
        let tokens: Vec<String> = fields[0].split(' ').map(str::to_string).collect();
        let acd = aspects
            .iter()
            .position(|a| a == fields[1])
            .ok_or_else(|| format!("line {}: unknown aspect {:?}", i + 1, fields[1]))?;
        let term_tags = match fields[2] {
            MISSING => None,
            f => Some(parse_tags::<TermTag>(f).map_err(|e| format!("line {}: {e}", i + 1))?),
        };
        let polarity_tags = match fields[3] {
            MISSING => None,
            f => Some(parse_tags::<PolarityTag>(f).map_err(|e| format!("line {}: {e}", i + 1))?),
        };
        let ex = TrainingExample {
            tokens,
            acd,
            term_tags,
            polarity_tags,
        };
        ex.check(i, aspects.len()).map_err(|e| format!("line {}: {e}", i + 1))?;
        out.push(ex);
    }
    Ok(out)
}

/// A native model with either built-in encoder.
pub enum NativeModel {
    Window(MultitaskModel<WindowEncoder>),
    Frozen(MultitaskModel<FrozenEmbeddingEncoder>),
}

impl NativeModel {
    pub fn new(table: EmbeddingTable, aspects: Vec<String>, config: &MultitaskConfig) -> Result<Self, ClassifierError> {
        config.validate()?;
        Ok(if config.encoder == FrozenEmbeddingEncoder::ID {
            NativeModel::Frozen(MultitaskModel::new(FrozenEmbeddingEncoder::new(table), aspects, config.rng_seed))
        } else {
            let enc = WindowEncoder::new(table, config.window_dim, config.hidden_dim, config.radius);
            NativeModel::Window(MultitaskModel::new(enc, aspects, config.rng_seed))
        })
    }

    pub fn train(&mut self, data: &[TrainingExample], config: &MultitaskConfig) -> Result<TrainReport, ClassifierError> {
        match self {
            NativeModel::Window(m) => train(m, data, config),
            NativeModel::Frozen(m) => train(m, data, config),
        }
    }

    pub fn predict(&self, tokens: &[String]) -> Result<Prediction, ClassifierError> {
        match self {
            NativeModel::Window(m) => predict(m, tokens),
            NativeModel::Frozen(m) => predict(m, tokens),
        }
    }

    pub fn aspects(&self) -> &[String] {
        match self {
            NativeModel::Window(m) => m.aspects(),
            NativeModel::Frozen(m) => m.aspects(),
        }
    }

    fn parts(&self) -> (&[f64], &EmbeddingTable) {
        match self {
            NativeModel::Window(m) => (m.params(), m.encoder().table()),
            NativeModel::Frozen(m) => (m.params(), m.encoder().table()),
        }
    }

    pub fn to_checkpoint(&self, config: &MultitaskConfig) -> Checkpoint {
        let (params, table) = self.parts();
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: config.clone(),
            aspects: self.aspects().to_vec(),
            params: params.to_vec(),
            embeddings: table.to_text(),
        }
    }
}

/// JSON container for a trained native model, including its frozen word vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: MultitaskConfig,
    pub aspects: Vec<String>,
    pub params: Vec<f64>,
    pub embeddings: String,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let c: Checkpoint = serde_json::from_str(text).map_err(|e| ClassifierError::Checkpoint(e.to_string()))?;
        if c.version != CHECKPOINT_VERSION {
            return Err(ClassifierError::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                c.version
            )));
        }
        Ok(c)
    }

    pub fn into_model(self) -> Result<NativeModel, ClassifierError> {
        let table = EmbeddingTable::from_text(&self.embeddings).map_err(|e| ClassifierError::Checkpoint(e.to_string()))?;
        let c = &self.config;
        Ok(if c.encoder == FrozenEmbeddingEncoder::ID {
            NativeModel::Frozen(MultitaskModel::from_params(FrozenEmbeddingEncoder::new(table), self.aspects, self.params)?)
        } else {
            let enc = WindowEncoder::new(table, c.window_dim, c.hidden_dim, c.radius);
            NativeModel::Window(MultitaskModel::from_params(enc, self.aspects, self.params)?)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Polarity;

    fn names() -> Vec<String> {
        vec!["food".into(), "service".into()]
    }

    #[test]
    fn export_round_trip() {
        let examples = vec![
            TrainingExample {
                tokens: vec!["the".into(), "pizza".into()],
                acd: 0,
                term_tags: Some(vec![TermTag::O, TermTag::B]),
                polarity_tags: Some(vec![PolarityTag::O, PolarityTag::B(Polarity::Neg)]),
            },
            TrainingExample {
                tokens: vec!["rude".into()],
                acd: 1,
                term_tags: None,
                polarity_tags: None,
            },
        ];
        let text = training_export(&examples, &names());
        assert_eq!(text, "the pizza\tfood\tO B\tO B-NEG\nrude\tservice\t-\t-\n");
        assert_eq!(parse_training_export(&text, &names()).unwrap(), examples);
        assert!(parse_training_export("a\tdrinks\t-\t-\n", &names()).is_err());
        assert!(parse_training_export("a b\tfood\tO\t-\n", &names()).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let table = EmbeddingTable::from_pairs(2, [("pizza", vec![0.25, -1.5]), ("rude", vec![1.0, 0.125])]);
        let cfg = MultitaskConfig {
            window_dim: 2,
            hidden_dim: 3,
            ..Default::default()
        };
        let model = NativeModel::new(table, names(), &cfg).unwrap();
        let json = model.to_checkpoint(&cfg).to_json();
        let back = Checkpoint::from_json(&json).unwrap();
        assert_eq!(back.config, cfg);
        let restored = back.into_model().unwrap();
        let tokens = vec!["rude".to_string(), "pizza".to_string()];
        assert_eq!(restored.predict(&tokens).unwrap(), model.predict(&tokens).unwrap());
        assert_eq!(restored.parts().0, model.parts().0);

        let bad = json.replacen("\"version\":1", "\"version\":9", 1);
        assert!(Checkpoint::from_json(&bad).is_err());
    }
}
