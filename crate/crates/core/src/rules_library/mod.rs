//! The shipped normalisation rules.
//!
//! Layout below `rules/`:
//!
//! ```text
//! core.rules                      bookkeeping declarations
//! commons/access.rules            readable access flags
//! normalisations/sound/*.rules    behaviour-preserving rewrites
//! normalisations/soundy/*.rules   rewrites only observable via reflection
//! ```
//!
//! The files are compiled into the library; `--rules` directories are
//! merged after them.

pub mod generate;

use std::path::PathBuf;

use crate::engine::{evaluate_with, EngineError, EngineOptions};
use crate::extractor::{edb_schema, FactDatabase, Schema};
use crate::rulelang::{
    assemble, classify_path, collect_rule_files, synthesize_default_rules, Params, RuleError, RuleFile, RuleSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SoundnessMode {
    SoundOnly,
    #[default]
    WithSoundy,
}

impl SoundnessMode {
    pub fn include_soundy(self) -> bool {
        self == SoundnessMode::WithSoundy
    }

    pub fn name(self) -> &'static str {
        match self {
            SoundnessMode::SoundOnly => "sound",
            SoundnessMode::WithSoundy => "soundy",
        }
    }
}

/// Embedded rule files, relative to the library root.
pub const LIBRARY: &[(&str, &str)] = &[
    ("core.rules", include_str!("../../rules/core.rules")),
    ("commons/access.rules", include_str!("../../rules/commons/access.rules")),
    ("normalisations/sound/checkcast.rules", include_str!("../../rules/normalisations/sound/checkcast.rules")),
    ("normalisations/sound/nullcheck.rules", include_str!("../../rules/normalisations/sound/nullcheck.rules")),
    (
        "normalisations/sound/object_methods.rules",
        include_str!("../../rules/normalisations/sound/object_methods.rules"),
    ),
    ("normalisations/sound/version.rules", include_str!("../../rules/normalisations/sound/version.rules")),
    ("normalisations/soundy/anon_final.rules", include_str!("../../rules/normalisations/soundy/anon_final.rules")),
    (
        "normalisations/soundy/inline_values.rules",
        include_str!("../../rules/normalisations/soundy/inline_values.rules"),
    ),
];

pub fn library_files() -> Vec<RuleFile> {
    LIBRARY
        .iter()
        .map(|(path, text)| RuleFile { path: path.to_string(), text: text.to_string(), soundness: classify_path(path) })
        .collect()
}

fn params(stride: i64) -> Params {
    Params::from([("STRIDE".to_string(), stride)])
}

/// Core, commons and sound rules, plus soundy rules in
/// [`SoundnessMode::WithSoundy`]. Copy rules are not included; they depend
/// on the EDB schema (see [`synthesize_default_rules`]).
pub fn canonical_rulesets(mode: SoundnessMode) -> RuleSet {
    canonical_rulesets_with(mode, 1).expect("shipped rules parse")
}

pub fn canonical_rulesets_with(mode: SoundnessMode, stride: i64) -> Result<RuleSet, RuleError> {
    assemble(&library_files(), mode.include_soundy(), &params(stride), "")
}

#[derive(Debug, Clone)]
pub struct NormalizerOptions {
    pub mode: SoundnessMode,
    pub stride: i64,
    pub extra_roots: Vec<PathBuf>,
    pub engine: EngineOptions,
}

impl Default for NormalizerOptions {
    fn default() -> Self {
        NormalizerOptions {
            mode: SoundnessMode::default(),
            stride: 1,
            extra_roots: Vec::new(),
            engine: EngineOptions::default(),
        }
    }
}

/// A validated program: EDB declarations, copy rules, library and extra
/// rules. Build once and reuse across classes.
#[derive(Debug, Clone)]
pub struct Normalizer {
    rules: RuleSet,
    engine: EngineOptions,
}

impl Normalizer {
    pub fn new(options: &NormalizerOptions) -> Result<Normalizer, RuleError> {
        Self::for_schema(&edb_schema(), options)
    }

    pub fn for_schema(schema: &Schema, options: &NormalizerOptions) -> Result<Normalizer, RuleError> {
        let mut rules = RuleSet { declarations: schema.clone(), ..Default::default() };
        rules.merge(synthesize_default_rules(schema), "<default>")?;
        rules.merge(canonical_rulesets_with(options.mode, options.stride)?, "<library>")?;
        for root in &options.extra_roots {
            let label = root.display().to_string();
            let extra =
                assemble(&collect_rule_files(root)?, options.mode.include_soundy(), &params(options.stride), &label)?;
            rules.merge(extra, &label)?;
        }
        rules.validate()?;
        Ok(Normalizer { rules, engine: options.engine.clone() })
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn normalize(&self, edb: &FactDatabase) -> Result<FactDatabase, EngineError> {
        evaluate_with(edb, &self.rules, &self.engine)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Copy rules for `edb`'s schema plus the canonical rules, evaluated.
pub fn apply_normalizations(edb: &FactDatabase, mode: SoundnessMode) -> Result<FactDatabase, NormalizeError> {
    let n = Normalizer::for_schema(&edb.schema, &NormalizerOptions { mode, ..Default::default() })?;
    Ok(n.normalize(edb)?)
}
