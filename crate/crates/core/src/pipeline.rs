//! End-to-end audits driven by a JSON config.
//!
//! Stage order is fixed: the synthetic release is loaded, encoded and
//! decomposed, the encoder is trained on it, and only then are the real
//! train and holdout tables read. Every file read and the training
//! start/finish are recorded in an access log that ends up in the run
//! manifest.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attacks::{
    child_table_rows, embed_all, mtmia_score_embedded, parent_rows, score_child_table,
    AttackError, AttackScoreSet, Baseline, EmbeddingSpace,
};
use crate::datagen::{self, DatagenError, ToySpec};
use crate::evalkit::{fidelity_report, roc_and_auc, EvalError, EvalReport, FidelityReport};
use crate::featenc::{apply_encoding, fit_encoding, EncodingSpec, IngestionReport};
use crate::hgnn::{
    train_encoder, EncoderCheckpoint, EncoderConfig, EncoderParams, EntityEmbedding, HgnnError,
};
use crate::relgraph::{
    build_graph, decompose_entities, DatabaseInstance, EntitySubgraph, Membership, RelError,
    RelationalSchema,
};

pub const MANIFEST_FORMAT: &str = "mtmia-manifest-v1";
pub const CHECKPOINT_FILE: &str = "encoder_checkpoint.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error(transparent)]
    Encoder(#[from] HgnnError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
}

impl PipelineError {
    /// 2 for configuration problems, 3 for bad data, 4 for numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Io { .. } => 3,
            PipelineError::Rel(RelError::Schema(_)) => 2,
            PipelineError::Rel(_) => 3,
            PipelineError::Encoder(e) => hgnn_code(e),
            PipelineError::Attack(e) => match e {
                AttackError::DegenerateDensity | AttackError::NonFiniteScore(_) => 4,
                AttackError::RadiusUndefined
                | AttackError::InvalidParameter(_)
                | AttackError::Unknown(_) => 2,
                AttackError::Encoder(e) => hgnn_code(e),
                _ => 3,
            },
            PipelineError::Eval(EvalError::NonFiniteScore(_)) => 4,
            PipelineError::Eval(_) => 3,
            PipelineError::Datagen(DatagenError::Rel(_)) => 3,
            PipelineError::Datagen(_) => 2,
        }
    }
}

fn hgnn_code(e: &HgnnError) -> i32 {
    match e {
        HgnnError::Config(_) | HgnnError::SchemaMismatch | HgnnError::Checkpoint(_) => 2,
        HgnnError::NonFiniteLoss { .. } | HgnnError::NonFiniteGradient { .. } | HgnnError::Diff(_) => 4,
    }
}

fn io_err(path: &Path, e: impl ToString) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackKind {
    Mtmia,
    Dcr,
    Mc,
    Kde,
}

impl AttackKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::Mtmia => "mtmia",
            AttackKind::Dcr => "dcr",
            AttackKind::Mc => "mc",
            AttackKind::Kde => "kde",
        }
    }
}

/// One attack run. `space` is `parent`, `context` or `final` for MT-MIA,
/// `raw` (root rows) or `child` (rows of `table`) for the baselines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub attack: AttackKind,
    pub space: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
}

impl AttackSpec {
    pub fn new(attack: AttackKind, space: &str) -> Self {
        Self {
            attack,
            space: space.to_string(),
            table: None,
            radius: None,
            bandwidth: None,
        }
    }

    fn baseline(&self) -> Option<Baseline> {
        match self.attack {
            AttackKind::Mtmia => None,
            AttackKind::Dcr => Some(Baseline::Dcr),
            AttackKind::Mc => Some(Baseline::Mc { radius: self.radius }),
            AttackKind::Kde => Some(Baseline::Kde {
                bandwidth: self.bandwidth,
            }),
        }
    }

    /// Stem used in output file names, e.g. `mtmia_final` or `dcr_child-transactions`.
    pub fn file_stem(&self) -> String {
        match &self.table {
            Some(t) if self.space == "child" => format!("{}_child-{}", self.attack.as_str(), t),
            _ => format!("{}_{}", self.attack.as_str(), self.space),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub schema: PathBuf,
    pub train_dir: PathBuf,
    pub holdout_dir: PathBuf,
    pub synth_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub encoder: EncoderConfig,
    /// Load this checkpoint instead of training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoder_checkpoint: Option<PathBuf>,
    pub attacks: Vec<AttackSpec>,
    #[serde(default)]
    pub fidelity: bool,
    /// Run seed; replaces `encoder.seed`.
    #[serde(default)]
    pub seed: u64,
}

impl AuditConfig {
    pub fn from_json_str(text: &str) -> Result<Self, PipelineError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_against(base);
        Ok(config)
    }

    pub fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.schema);
        fix(&mut self.train_dir);
        fix(&mut self.holdout_dir);
        fix(&mut self.synth_dir);
        fix(&mut self.output_dir);
        if let Some(p) = &mut self.encoder_checkpoint {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.attacks.is_empty() {
            return Err(PipelineError::Config("attack list is empty".into()));
        }
        let mut stems = HashSet::new();
        for a in &self.attacks {
            let ok = match a.attack {
                AttackKind::Mtmia => a.space.parse::<EmbeddingSpace>().is_ok() && a.table.is_none(),
                _ => match a.space.as_str() {
                    "raw" => a.table.is_none(),
                    "child" => a.table.is_some(),
                    _ => false,
                },
            };
            if !ok {
                return Err(PipelineError::Config(format!(
                    "attack {} cannot use space {:?}{}",
                    a.attack.as_str(),
                    a.space,
                    a.table.as_deref().map(|t| format!(" with table {t}")).unwrap_or_default()
                )));
            }
            if !stems.insert(a.file_stem()) {
                return Err(PipelineError::Config(format!("attack {} listed twice", a.file_stem())));
            }
        }
        let mut encoder = self.encoder.clone();
        encoder.seed = self.seed;
        encoder.validate()?;
        Ok(())
    }

    fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig {
            seed: self.seed,
            ..self.encoder.clone()
        }
    }

    fn needs_encoder(&self) -> bool {
        self.attacks.iter().any(|a| a.attack == AttackKind::Mtmia)
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum AccessEvent {
    Read { path: String },
    TrainingStarted,
    TrainingFinished,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessLog {
    pub events: Vec<AccessEvent>,
}

impl AccessLog {
    pub fn read(&mut self, path: &Path) {
        self.events.push(AccessEvent::Read {
            path: path.display().to_string(),
        });
    }

    /// Paths read before training finished (all reads when no training ran).
    pub fn reads_before_training_finished(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for e in &self.events {
            match e {
                AccessEvent::Read { path } => out.push(path.as_str()),
                AccessEvent::TrainingFinished => break,
                AccessEvent::TrainingStarted => {}
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityCounts {
    pub train: usize,
    pub holdout: usize,
    pub synth: usize,
    pub unreachable_rows: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: AuditConfig,
    pub encoder_trained: bool,
    pub loss_history: Option<Vec<f64>>,
    pub entities: EntityCounts,
    pub ingestion: BTreeMap<String, IngestionReport>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub access_log: AccessLog,
}

#[derive(Clone, Debug)]
pub struct AuditOutcome {
    pub reports: Vec<EvalReport>,
    pub scores: Vec<AttackScoreSet>,
    pub fidelity: Option<FidelityReport>,
    pub manifest: Manifest,
}

impl AuditOutcome {
    pub fn report(&self, attack: &str, space: &str) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.attack == attack && r.space == space)
    }
}

struct Side {
    db: DatabaseInstance,
    entities: Vec<EntitySubgraph>,
}

struct Run<'a> {
    config: &'a AuditConfig,
    schema: RelationalSchema,
    encoding: Option<EncodingSpec>,
    log: AccessLog,
    warnings: Vec<String>,
    ingestion: BTreeMap<String, IngestionReport>,
    unreachable: BTreeMap<String, usize>,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    fn load_db(&mut self, dir: &Path) -> Result<DatabaseInstance, PipelineError> {
        let log = &mut self.log;
        Ok(DatabaseInstance::load_dir_with(&self.schema, dir, |p| log.read(p))?)
    }

    /// Encodes with the synthetic fit and splits into entities.
    fn entities(&mut self, name: &str, db: DatabaseInstance) -> Result<Side, PipelineError> {
        let encoding = self.encoding.as_ref().expect("encoding fitted first");
        let (features, report) = apply_encoding(encoding, &self.schema, &db)?;
        if report.total_missing() > 0 || report.total_unseen() > 0 {
            self.warnings.push(format!(
                "{name}: {} missing cells and {} unseen categories encoded as defaults",
                report.total_missing(),
                report.total_unseen()
            ));
        }
        self.ingestion.insert(name.to_string(), report);
        let graph = Arc::new(build_graph(&self.schema, &db, &features)?);
        let decomposition = decompose_entities(graph)?;
        if decomposition.unreachable > 0 {
            let msg = format!(
                "{name}: {} rows reach no {} row and were dropped",
                decomposition.unreachable,
                self.schema.root_table()
            );
            log::warn!("{msg}");
            self.warnings.push(msg);
        }
        self.unreachable.insert(name.to_string(), decomposition.unreachable);
        Ok(Side {
            db,
            entities: decomposition.entities,
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.config.output_dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

fn check_paths(config: &AuditConfig) -> Result<(), PipelineError> {
    let mut required = vec![
        ("schema", &config.schema),
        ("train_dir", &config.train_dir),
        ("holdout_dir", &config.holdout_dir),
        ("synth_dir", &config.synth_dir),
    ];
    if let Some(p) = &config.encoder_checkpoint {
        required.push(("encoder_checkpoint", p));
    }
    for (name, p) in required {
        if !p.exists() {
            return Err(PipelineError::Config(format!("{name} {} does not exist", p.display())));
        }
    }
    Ok(())
}

fn membership_labels(
    members: &[EntitySubgraph],
    holdout: &[EntitySubgraph],
) -> Result<HashMap<String, Membership>, PipelineError> {
    let mut labels = HashMap::with_capacity(members.len() + holdout.len());
    for (subs, label) in [(members, Membership::Member), (holdout, Membership::Holdout)] {
        for s in subs {
            // Each side is its own graph, so one label per graph.
            let per_type: Vec<Vec<Membership>> = s
                .graph()
                .node_types()
                .iter()
                .map(|t| vec![label; t.len()])
                .collect();
            s.membership(&per_type)?;
            if labels.insert(s.id().to_string(), label).is_some() {
                return Err(PipelineError::Rel(RelError::Data(format!(
                    "entity id {:?} appears in both train and holdout",
                    s.id()
                ))));
            }
        }
    }
    Ok(labels)
}

/// Runs the configured audit and writes every report under `output_dir`.
pub fn run_audit(config: &AuditConfig) -> Result<AuditOutcome, PipelineError> {
    config.validate()?;
    check_paths(config)?;
    fs::create_dir_all(&config.output_dir).map_err(|e| io_err(&config.output_dir, e))?;

    let mut log = AccessLog::default();
    log.read(&config.schema);
    let schema_text = fs::read_to_string(&config.schema).map_err(|e| io_err(&config.schema, e))?;
    let schema = RelationalSchema::from_json_str(&schema_text)?;
    for a in &config.attacks {
        if let Some(t) = &a.table {
            match schema.table_index(t) {
                Some(i) if i != schema.root_index() => {}
                _ => {
                    return Err(PipelineError::Config(format!(
                        "child-table attack needs a non-root table of the schema, got {t:?}"
                    )))
                }
            }
        }
    }
    let mut run = Run {
        config,
        schema,
        encoding: None,
        log,
        warnings: Vec::new(),
        ingestion: BTreeMap::new(),
        unreachable: BTreeMap::new(),
        outputs: Vec::new(),
    };

    // Synthetic side first: encoding fit, decomposition, encoder.
    let synth_db = run.load_db(&config.synth_dir)?;
    run.encoding = Some(fit_encoding(&run.schema, &synth_db)?);
    let synth = run.entities("synth", synth_db)?;
    if synth.entities.is_empty() {
        return Err(PipelineError::Attack(AttackError::EmptySynth));
    }

    let mut encoder_trained = false;
    let mut loss_history = None;
    let params = if !config.needs_encoder() {
        None
    } else if let Some(path) = &config.encoder_checkpoint {
        run.log.read(path);
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let ckpt = EncoderCheckpoint::from_json_str(&text)?;
        Some(EncoderParams::from_checkpoint(&ckpt, &run.schema)?)
    } else {
        run.log.events.push(AccessEvent::TrainingStarted);
        let (params, history) =
            train_encoder(&config.encoder_config(), &run.schema, &synth.entities)?;
        run.log.events.push(AccessEvent::TrainingFinished);
        encoder_trained = true;
        loss_history = Some(history.epochs);
        let mut text = params.to_checkpoint().to_json();
        text.push('\n');
        run.write(CHECKPOINT_FILE, text.as_bytes())?;
        Some(params)
    };

    // Real data only from here on.
    let train_db = run.load_db(&config.train_dir)?;
    let holdout_db = run.load_db(&config.holdout_dir)?;
    let train = run.entities("train", train_db)?;
    let holdout = run.entities("holdout", holdout_db)?;
    if train.entities.len() != holdout.entities.len() {
        let msg = format!(
            "unbalanced evaluation set: {} train vs {} holdout entities",
            train.entities.len(),
            holdout.entities.len()
        );
        log::warn!("{msg}");
        run.warnings.push(msg);
    }
    let labels = membership_labels(&train.entities, &holdout.entities)?;
    let queries: Vec<EntitySubgraph> = train
        .entities
        .iter()
        .chain(&holdout.entities)
        .cloned()
        .collect();

    let mut embedded: Option<(Vec<EntityEmbedding>, Vec<EntityEmbedding>)> = None;
    let mut reports = Vec::new();
    let mut score_sets = Vec::new();
    for spec in &config.attacks {
        let set = match spec.baseline() {
            None => {
                let params = params.as_ref().expect("encoder prepared for mtmia");
                if embedded.is_none() {
                    embedded = Some((
                        embed_all(params, &queries)?,
                        embed_all(params, &synth.entities)?,
                    ));
                }
                let (q, s) = embedded.as_ref().expect("just set");
                let space: EmbeddingSpace = spec.space.parse()?;
                mtmia_score_embedded(q, s, space)?
            }
            Some(baseline) if spec.space == "raw" => {
                let synth_rows: Vec<Vec<f64>> = parent_rows(&synth.entities)
                    .into_iter()
                    .map(|q| q.vector)
                    .collect();
                baseline.score(&parent_rows(&queries), &synth_rows, "raw")?
            }
            Some(baseline) => {
                let table = spec.table.as_deref().expect("validated child spec");
                let t = run.schema.table_index(table).expect("checked above");
                let graph = synth.entities[0].graph();
                let x = &graph.node_type(t).features;
                let synth_rows: Vec<Vec<f64>> = (0..x.rows()).map(|i| x.row(i).to_vec()).collect();
                score_child_table(&baseline, &child_table_rows(&queries, t), &synth_rows, table)?
            }
        };
        let set = set.with_labels(&labels);
        let report = roc_and_auc(&set)?;
        let stem = spec.file_stem();
        run.write_json(&format!("report_{stem}.json"), &report)?;
        let mut buf = Vec::new();
        set.write_csv(&mut buf)?;
        run.write(&format!("scores_{stem}.csv"), &buf)?;
        let mut buf = Vec::new();
        report.write_roc_csv(&mut buf)?;
        run.write(&format!("roc_{stem}.csv"), &buf)?;
        reports.push(report);
        score_sets.push(set);
    }

    let fidelity = if config.fidelity {
        let report = fidelity_report(&run.schema, &train.db, &synth.db)?;
        run.write_json("fidelity.json", &report)?;
        Some(report)
    } else {
        None
    };

    let mut outputs = run.outputs.clone();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        config_hash: config.hash(),
        config: config.clone(),
        encoder_trained,
        loss_history,
        entities: EntityCounts {
            train: train.entities.len(),
            holdout: holdout.entities.len(),
            synth: synth.entities.len(),
            unreachable_rows: run.unreachable.clone(),
        },
        ingestion: run.ingestion.clone(),
        warnings: run.warnings.clone(),
        outputs,
        access_log: run.log.clone(),
    };
    run.write_json("manifest.json", &manifest)?;
    Ok(AuditOutcome {
        reports,
        scores: score_sets,
        fidelity,
        manifest,
    })
}

/// One row of the embedding-space decomposition table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposeRow {
    pub space: String,
    pub auc: f64,
    pub tpr_at_0: f64,
    pub tpr_at_1e_3: f64,
    pub tpr_at_1e_2: f64,
}

pub const DECOMPOSE_ROWS: [&str; 4] = ["vanilla", "z_parent", "z_context", "z_final"];

/// Raw-row DCR plus MT-MIA in each embedding space, as a four-row table.
/// Also writes `decompose.json` and `decompose.csv`.
pub fn run_decompose_attack(config: &AuditConfig) -> Result<Vec<DecomposeRow>, PipelineError> {
    let mut config = config.clone();
    config.attacks = vec![
        AttackSpec::new(AttackKind::Dcr, "raw"),
        AttackSpec::new(AttackKind::Mtmia, "parent"),
        AttackSpec::new(AttackKind::Mtmia, "context"),
        AttackSpec::new(AttackKind::Mtmia, "final"),
    ];
    let outcome = run_audit(&config)?;
    let rows: Vec<DecomposeRow> = DECOMPOSE_ROWS
        .iter()
        .zip(&outcome.reports)
        .map(|(name, r)| DecomposeRow {
            space: name.to_string(),
            auc: r.auc,
            tpr_at_0: r.tpr_at(0.0).unwrap_or(0.0),
            tpr_at_1e_3: r.tpr_at(1e-3).unwrap_or(0.0),
            tpr_at_1e_2: r.tpr_at(1e-2).unwrap_or(0.0),
        })
        .collect();
    let out = &config.output_dir;
    let mut text = serde_json::to_string_pretty(&rows).expect("rows serialize");
    text.push('\n');
    let path = out.join("decompose.json");
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    let path = out.join("decompose.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    for row in &rows {
        w.serialize(row).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    Ok(rows)
}

/// Which mock generator produces the toy's synthetic release.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ToyGenerator {
    Memorizing { noise: f64 },
    Independent,
}

/// Default noise of the toy's memorizing generator, in units of the
/// feature standard deviation.
pub const TOY_NOISE: f64 = 1.0;

/// Writes `schema.json`, `train/`, `holdout/`, `synth/` and an audit
/// config `toy.json` under `dir`; returns the config path.
pub fn write_toy(
    dir: &Path,
    spec: &ToySpec,
    generator: ToyGenerator,
    encoder: EncoderConfig,
) -> Result<PathBuf, PipelineError> {
    let toy = datagen::gen_toy(spec)?;
    let synth = match generator {
        ToyGenerator::Memorizing { noise } => datagen::mock_memorizing_generator(
            &toy.train,
            &toy.schema,
            noise,
            spec.seed.wrapping_add(1),
        )?,
        ToyGenerator::Independent => {
            datagen::mock_independent_generator(&toy.train, &toy.schema, spec.seed.wrapping_add(1))?
        }
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let schema_path = dir.join("schema.json");
    fs::write(&schema_path, toy.schema.to_json_pretty() + "\n").map_err(|e| io_err(&schema_path, e))?;
    for (name, db) in [("train", &toy.train), ("holdout", &toy.holdout), ("synth", &synth)] {
        let sub = dir.join(name);
        fs::create_dir_all(&sub).map_err(|e| io_err(&sub, e))?;
        db.write_dir(&toy.schema, &sub)?;
    }
    let config = AuditConfig {
        schema: "schema.json".into(),
        train_dir: "train".into(),
        holdout_dir: "holdout".into(),
        synth_dir: "synth".into(),
        output_dir: "out".into(),
        encoder,
        encoder_checkpoint: None,
        attacks: vec![
            AttackSpec::new(AttackKind::Mtmia, "final"),
            AttackSpec::new(AttackKind::Mtmia, "parent"),
            AttackSpec::new(AttackKind::Mtmia, "context"),
            AttackSpec::new(AttackKind::Dcr, "raw"),
            AttackSpec::new(AttackKind::Mc, "raw"),
            AttackSpec::new(AttackKind::Kde, "raw"),
        ],
        fidelity: true,
        seed: spec.seed,
    };
    let path = dir.join("toy.json");
    let mut text = serde_json::to_string_pretty(&config).expect("config serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
