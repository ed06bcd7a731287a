//! Run configuration, dataset ingestion, workflow dispatch and result files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bce_polytope::assemble;
use crate::bootstrap_test::{
    confidence_set_theta, test_null, ConfidenceSet, GeometryCache, MarketDataset, NullDecision, TestConfig, TestModel,
    ThetaEvaluator, ThetaTestResult,
};
use crate::error::{Error, Result};
use crate::game_model::{apply_theta, baseline_partition, ActionSpace, BaselineKind, DiscretizedGame, GameSpec, ThetaComponent};
use crate::mc_sim::{power_experiment, write_power_csv, PowerConfig, PowerRow};
use crate::multi_test::{
    bonferroni_select, holm_select, market_pvalues, sequential_test, write_market_csv, BaselineChain, MarketCSResult,
    MarketPValue, SequentialResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Workflow {
    Test,
    CsTheta,
    SeqTest,
    CsMarkets,
    McPower,
    BceBounds,
}

impl Workflow {
    pub fn name(self) -> &'static str {
        match self {
            Workflow::Test => "test",
            Workflow::CsTheta => "cs-theta",
            Workflow::SeqTest => "seq-test",
            Workflow::CsMarkets => "cs-markets",
            Workflow::McPower => "mc-power",
            Workflow::BceBounds => "bce-bounds",
        }
    }

    fn needs_data(self) -> bool {
        matches!(self, Workflow::Test | Workflow::CsTheta | Workflow::SeqTest | Workflow::CsMarkets)
    }
}

/// θ at which `bce-bounds` evaluates the prediction; without it the game is used as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSpec {
    pub map: Vec<ThetaComponent>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workflow: Option<Workflow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<TestModel<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineKind>,
    /// Most informative first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Vec<BaselineKind>>,
    /// One baseline for all markets or one per covariate cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market_baselines: Option<Vec<BaselineKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestConfig<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerConfig<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a JSON config; relative paths inside it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.data, &mut cfg.out, &mut cfg.cache].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, workflow: Workflow, o: &Overrides) -> Result<()> {
        if let Some(w) = self.workflow {
            if w != workflow {
                return Err(Error::Config(format!("config is for `{}`, not `{}`", w.name(), workflow.name())));
            }
        }
        self.workflow = Some(workflow);
        if o.data.is_some() {
            self.data.clone_from(&o.data);
        }
        if o.out.is_some() {
            self.out.clone_from(&o.out);
        }
        if o.cache.is_some() {
            self.cache.clone_from(&o.cache);
        }
        if let Some(seed) = o.seed {
            if let Some(t) = &mut self.test {
                t.seed = seed;
            }
            if let Some(p) = &mut self.power {
                p.test.seed = seed;
            }
        }
        Ok(())
    }

    /// Checks that the fields the workflow needs are present.
    pub fn validate(&self) -> Result<Workflow> {
        let w = self.workflow.ok_or_else(|| Error::Config("no workflow selected".into()))?;
        let missing = |field: &str| Error::Config(format!("`{}` needs `{field}` in the config", w.name()));
        if w != Workflow::McPower && self.model.is_none() {
            return Err(missing("model"));
        }
        match w {
            Workflow::Test | Workflow::CsTheta | Workflow::BceBounds if self.baseline.is_none() => return Err(missing("baseline")),
            Workflow::SeqTest if self.chain.as_ref().is_none_or(Vec::is_empty) => return Err(missing("chain")),
            Workflow::CsMarkets if self.baseline.is_none() && self.market_baselines.is_none() => {
                return Err(missing("baseline or market_baselines"))
            }
            Workflow::McPower if self.power.is_none() => return Err(missing("power")),
            _ => {}
        }
        if w.needs_data() {
            if self.test.is_none() {
                return Err(missing("test"));
            }
            let data = self.data.as_ref().ok_or_else(|| missing("data (or --data)"))?;
            if !data.is_file() {
                return Err(Error::Config(format!("data file {} does not exist", data.display())));
            }
        }
        Ok(w)
    }
}

/// A dataset with ingestion diagnostics.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub data: MarketDataset,
    pub warnings: Vec<String>,
}

impl LoadedData {
    /// Sample size, per-cell counts and outcome frequencies.
    pub fn summary(&self, actions: &ActionSpace) -> String {
        let d = &self.data;
        let mut s = format!("n = {}\n", d.n);
        for (x, row) in d.counts.iter().enumerate() {
            let nx = d.n_x(x);
            let freqs: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(y, &c)| {
                    let f = if nx > 0 { c as f64 / nx as f64 } else { 0.0 };
                    format!("{}: {f:.3}", outcome_label(actions.profile(y)))
                })
                .collect();
            s += &format!("{}  n_x = {nx}  {}\n", d.covariate_labels[x], freqs.join(", "));
        }
        s
    }
}

fn outcome_label(profile: &[usize]) -> String {
    format!("y=({})", profile.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
}

/// Label of covariate cell `x`, e.g. `x=(0,1)`; one-dimensional covariates drop the parentheses.
pub fn covariate_label(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    if parts.len() == 1 {
        format!("x={}", parts[0])
    } else {
        format!("x=({})", parts.join(","))
    }
}

/// Reads `market_id, x_0..x_{d−1}, y_0..y_{|N|−1}`, mapping covariate codes
/// onto the game's covariate support.
pub fn load_dataset(path: &Path, game: &GameSpec<f64>) -> Result<LoadedData> {
    let file = fs::File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    read_dataset(file, game)
}

pub fn read_dataset<R: std::io::Read>(input: R, game: &GameSpec<f64>) -> Result<LoadedData> {
    game.validate()?;
    let d = game.payoff.beta.len();
    let players = game.num_players;
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::Parse { line: 1, msg: "empty file".into() });
    }
    let expected: Vec<String> = std::iter::once("market_id".to_string())
        .chain((0..d).map(|j| format!("x_{j}")))
        .chain((0..players).map(|i| format!("y_{i}")))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse { line: 1, msg: format!("header must be `{}`", expected.join(",")) });
    }
    let actions = ActionSpace::new(&game.actions_per_player);
    let mut counts = vec![vec![0u64; actions.len()]; game.covariate_support.len()];
    let mut seen = std::collections::HashSet::new();
    let mut warnings = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() })?;
        let line = record.position().map_or(rows + 2, |p| p.line() as usize);
        let parse_err = |msg: String| Error::Parse { line, msg };
        if record.len() != expected.len() {
            return Err(parse_err(format!("expected {} fields, found {}", expected.len(), record.len())));
        }
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            let msg = format!("line {line}: duplicate market_id `{id}` kept");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let codes = (0..d)
            .map(|j| record[1 + j].parse::<i64>().map_err(|_| parse_err(format!("x_{j} = `{}` is not an integer code", &record[1 + j]))))
            .collect::<Result<Vec<i64>>>()?;
        let x = game
            .covariate_support
            .iter()
            .position(|s| s.iter().zip(&codes).all(|(&v, &c)| v == c as f64))
            .ok_or_else(|| parse_err(format!("covariate codes {codes:?} are not in the covariate support")))?;
        let y = (0..players)
            .map(|i| {
                let raw = &record[1 + d + i];
                match raw.parse::<usize>() {
                    Ok(a) if a < game.actions_per_player[i] => Ok(a),
                    _ => Err(parse_err(format!("y_{i} = `{raw}` is not an action of player {i}"))),
                }
            })
            .collect::<Result<Vec<usize>>>()?;
        let k = actions.index_of(&y).ok_or_else(|| parse_err("action profile out of range".into()))?;
        counts[x][k] += 1;
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse { line: 2, msg: "no data rows".into() });
    }
    let labels = game.covariate_support.iter().map(|s| covariate_label(s)).collect();
    Ok(LoadedData { data: MarketDataset::new(counts, labels)?, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketsPayload {
    pub markets: Vec<MarketPValue<f64>>,
    pub bonferroni: MarketCSResult<f64>,
    pub holm: MarketCSResult<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub covariate: String,
    pub outcome: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Payload {
    Test(NullDecision<f64>),
    CsTheta(ConfidenceSet<f64>),
    SeqTest(SequentialResult<f64>),
    CsMarkets(MarketsPayload),
    McPower(Vec<PowerRow>),
    BceBounds(Vec<BoundsRow>),
}

impl Payload {
    pub fn workflow(&self) -> Workflow {
        match self {
            Payload::Test(_) => Workflow::Test,
            Payload::CsTheta(_) => Workflow::CsTheta,
            Payload::SeqTest(_) => Workflow::SeqTest,
            Payload::CsMarkets(_) => Workflow::CsMarkets,
            Payload::McPower(_) => Workflow::McPower,
            Payload::BceBounds(_) => Workflow::BceBounds,
        }
    }

    /// `Some(true)` when a decision workflow rejected a null.
    pub fn rejection(&self) -> Option<bool> {
        match self {
            Payload::Test(d) => Some(d.reject),
            Payload::SeqTest(s) => Some(s.rejected > 0),
            Payload::CsMarkets(m) => Some(m.holm.rejected.iter().any(|&r| r)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub workflow: Workflow,
    pub config: RunConfig,
    /// `sha256:` digest of the effective config and the data file.
    pub input_hash: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub warnings: Vec<String>,
    pub reject: Option<bool>,
    pub payload: Payload,
}

impl ResultEnvelope {
    pub fn validate(&self) -> Result<()> {
        if self.payload.workflow() != self.workflow {
            return Err(Error::Internal(format!("payload does not belong to `{}`", self.workflow.name())));
        }
        Ok(())
    }

    /// 0 on completion, 2 when a decision workflow rejected.
    pub fn exit_code(&self) -> i32 {
        if self.reject == Some(true) {
            2
        } else {
            0
        }
    }
}

static CAPTURED: Mutex<Vec<String>> = Mutex::new(Vec::new());

struct CapturingLogger {
    inner: env_logger::Logger,
}

impl log::Log for CapturingLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn || self.inner.enabled(metadata)
    }

    fn log(&self, record: &log::Record) {
        if record.level() <= log::Level::Warn {
            let msg = record.args().to_string();
            let mut captured = CAPTURED.lock().unwrap_or_else(|e| e.into_inner());
            if !captured.contains(&msg) {
                captured.push(msg);
            }
        }
        if self.inner.matches(record) {
            self.inner.log(record);
        }
    }

    fn flush(&self) {
        self.inner.flush();
    }
}

/// Installs a stderr logger; warnings are also collected for the result envelope.
pub fn init_logging(verbose: bool) {
    let level = if verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    let inner = env_logger::Builder::new().filter_level(level).parse_default_env().build();
    let max = inner.filter().max(log::LevelFilter::Warn);
    if log::set_boxed_logger(Box::new(CapturingLogger { inner })).is_ok() {
        log::set_max_level(max);
    }
}

fn take_warnings() -> Vec<String> {
    std::mem::take(&mut *CAPTURED.lock().unwrap_or_else(|e| e.into_inner()))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

fn input_hash(config: &RunConfig, data: Option<&[u8]>) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config)?);
    h.update([0u8]);
    if let Some(bytes) = data {
        h.update(bytes);
    }
    Ok(format!("sha256:{:x}", h.finalize()))
}

/// Runs the configured workflow, writing result files when `out` is set.
pub fn run(config: &RunConfig) -> Result<ResultEnvelope> {
    let workflow = config.validate()?;
    let started = now_ms();
    take_warnings();
    let mut warnings = Vec::new();
    let data_bytes = match (&config.data, workflow.needs_data()) {
        (Some(p), true) => Some(fs::read(p)?),
        _ => None,
    };
    let loaded = match (&data_bytes, &config.model) {
        (Some(bytes), Some(model)) => {
            let l = read_dataset(bytes.as_slice(), &model.game)?;
            warnings.extend(l.warnings.iter().cloned());
            log::info!("dataset summary\n{}", l.summary(&ActionSpace::new(&model.game.actions_per_player)));
            Some(l.data)
        }
        _ => None,
    };
    let cache = GeometryCache::new(config.cache.clone())?;
    let payload = dispatch(workflow, config, loaded.as_ref(), &cache)?;
    for w in take_warnings() {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    let envelope = ResultEnvelope {
        workflow,
        config: config.clone(),
        input_hash: input_hash(config, data_bytes.as_deref())?,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        warnings,
        reject: payload.rejection(),
        payload,
    };
    if let Some(dir) = &config.out {
        write_outputs(dir, &envelope)?;
    }
    Ok(envelope)
}

fn dispatch(w: Workflow, cfg: &RunConfig, data: Option<&MarketDataset>, cache: &GeometryCache<f64>) -> Result<Payload> {
    let need = |what: &str| Error::Internal(format!("validated config lacks {what}"));
    let model = cfg.model.as_ref();
    Ok(match w {
        Workflow::Test | Workflow::CsTheta => {
            let (data, model, test) = (data.ok_or_else(|| need("data"))?, model.ok_or_else(|| need("model"))?, cfg.test.as_ref().ok_or_else(|| need("test"))?);
            let baseline = cfg.baseline.clone().ok_or_else(|| need("baseline"))?;
            let eval = ThetaEvaluator::new(data, model, baseline, test, cache)?;
            if w == Workflow::Test {
                Payload::Test(test_null(&eval)?)
            } else {
                Payload::CsTheta(confidence_set_theta(&eval)?)
            }
        }
        Workflow::SeqTest => {
            let (data, model, test) = (data.ok_or_else(|| need("data"))?, model.ok_or_else(|| need("model"))?, cfg.test.as_ref().ok_or_else(|| need("test"))?);
            let chain = BaselineChain::new(cfg.chain.clone().unwrap_or_default(), model)?;
            Payload::SeqTest(sequential_test(&chain, data, model, test, cache)?)
        }
        Workflow::CsMarkets => {
            let (data, model, test) = (data.ok_or_else(|| need("data"))?, model.ok_or_else(|| need("model"))?, cfg.test.as_ref().ok_or_else(|| need("test"))?);
            let baselines = match (&cfg.market_baselines, &cfg.baseline) {
                (Some(b), _) => b.clone(),
                (None, Some(b)) => vec![b.clone()],
                (None, None) => return Err(need("baseline")),
            };
            let markets = market_pvalues(data, model, &baselines, test, cache)?;
            let floor = 1.0 / (test.draws + 1) as f64;
            if floor > test.alpha / markets.len().max(1) as f64 {
                log::warn!(
                    "B = {} draws give a p-value floor of {floor:.4}, above alpha/|X| = {:.4}; Bonferroni cannot reject",
                    test.draws,
                    test.alpha / markets.len() as f64
                );
            }
            let p: Vec<f64> = markets.iter().map(|m| m.p_value).collect();
            let bonferroni = bonferroni_select(&p, test.alpha)?;
            let holm = holm_select(&p, test.alpha)?;
            Payload::CsMarkets(MarketsPayload { markets, bonferroni, holm })
        }
        Workflow::McPower => Payload::McPower(power_experiment(cfg.power.as_ref().ok_or_else(|| need("power"))?, cache)?),
        Workflow::BceBounds => {
            let model = model.ok_or_else(|| need("model"))?;
            let baseline = cfg.baseline.as_ref().ok_or_else(|| need("baseline"))?;
            Payload::BceBounds(bce_bounds(model, baseline, cfg.bounds.as_ref())?)
        }
    })
}

/// Lower and upper BCE probability of every outcome in every covariate cell.
pub fn bce_bounds(model: &TestModel<f64>, baseline: &BaselineKind, at: Option<&BoundsSpec>) -> Result<Vec<BoundsRow>> {
    let spec = match at {
        Some(b) => apply_theta(&model.game, &b.map, &b.theta)?,
        None => model.game.clone(),
    };
    let game = DiscretizedGame::new(spec, &model.grid_sizes, model.tails)?;
    let partition = baseline_partition(baseline, &game.grid)?;
    let k = game.actions.len();
    let uniform = vec![1.0 / k as f64; k];
    let mut rows = Vec::new();
    for x in &game.spec.covariate_support {
        let poly = assemble(&game, &partition, x, &uniform)?;
        for y in 0..k {
            let (lower, upper) = poly.outcome_bounds(y)?;
            rows.push(BoundsRow { covariate: covariate_label(x), outcome: outcome_label(game.actions.profile(y)), lower, upper });
        }
    }
    Ok(rows)
}

fn write_theta_csv<W: Write>(records: &[ThetaTestResult<f64>], alpha: f64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = records.first().map_or(0, |r| r.theta.len());
    let mut header: Vec<String> = (0..dim).map(|j| format!("theta_{j}")).collect();
    header.extend(["t_n", "p_value", "p_strict", "retained"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = r.theta.iter().map(ToString::to_string).collect();
        row.extend([r.t_n.to_string(), r.p_value.to_string(), r.p_strict.to_string(), (r.p_value > alpha).to_string()]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(dir: &Path, env: &ResultEnvelope) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("result.json"), serde_json::to_vec_pretty(env)?)?;
    let file = |name: &str| fs::File::create(dir.join(name));
    match &env.payload {
        Payload::Test(d) => write_theta_csv(&d.records, env.config.test.as_ref().map_or(0.05, |t| t.alpha), file("theta_pvalues.csv")?)?,
        Payload::CsTheta(cs) => write_theta_csv(&cs.records, cs.alpha, file("theta_pvalues.csv")?)?,
        Payload::SeqTest(s) => {
            let mut w = csv::Writer::from_writer(file("chain.csv")?);
            w.write_record(["step", "baseline", "p_value", "decision"])?;
            for (j, st) in s.steps.iter().enumerate() {
                let decision = if st.reject { "reject" } else { "retain" };
                w.write_record([(j + 1).to_string(), st.label.clone(), st.p_value.to_string(), decision.to_string()])?;
            }
            w.flush()?;
        }
        Payload::CsMarkets(m) => {
            let covariates = env.config.model.as_ref().map(|m| m.game.covariate_support.clone()).unwrap_or_default();
            write_market_csv(&m.markets, &covariates, &m.bonferroni, &m.holm, file("markets.csv")?)?;
        }
        Payload::McPower(rows) => write_power_csv(rows, file("power.csv")?)?,
        Payload::BceBounds(rows) => {
            let mut w = csv::Writer::from_writer(file("bounds.csv")?);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// One-line human summary of an envelope.
pub fn summary_line(env: &ResultEnvelope) -> String {
    match &env.payload {
        Payload::Test(d) => format!(
            "sup p = {:.4} at theta = {:?}: {}",
            d.sup_p,
            d.theta_best,
            if d.reject { "reject" } else { "fail to reject" }
        ),
        Payload::CsTheta(cs) => format!("{} of {} grid points retained", cs.retained.len(), cs.records.len()),
        Payload::SeqTest(s) => format!("rejected {} of {} baselines", s.rejected, s.steps.len().max(s.rejected)),
        Payload::CsMarkets(m) => format!(
            "{} markets; Bonferroni rejects {}, Holm rejects {}",
            m.markets.len(),
            m.bonferroni.rejected.iter().filter(|&&r| r).count(),
            m.holm.rejected.iter().filter(|&&r| r).count()
        ),
        Payload::McPower(rows) => format!("{} design points", rows.len()),
        Payload::BceBounds(rows) => format!("{} outcome bounds", rows.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::{Marginal, PayoffSpec};

    fn game() -> GameSpec<f64> {
        GameSpec {
            num_players: 2,
            actions_per_player: vec![2, 2],
            payoff: PayoffSpec { beta: vec![0.5], delta: vec![vec![0.0, -1.0], vec![-1.0, 0.0]], interaction_sign: 1.0 },
            type_dist: vec![Marginal::StandardNormal],
            atoms: None,
            rho: 0.0,
            covariate_support: vec![vec![0.0], vec![1.0]],
        }
    }

    #[test]
    fn counts_rows() {
        let csv = "market_id,x_0,y_0,y_1\na,0,1,0\nb,0,1,0\nc,0,1,0\n";
        let l = read_dataset(csv.as_bytes(), &game()).unwrap();
        assert_eq!(l.data.counts[0], vec![0, 0, 3, 0]);
        assert_eq!(l.data.n, 3);
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn duplicate_ids_warn() {
        let csv = "market_id,x_0,y_0,y_1\na,0,1,0\na,1,0,0\n";
        let l = read_dataset(csv.as_bytes(), &game()).unwrap();
        assert_eq!(l.data.n, 2);
        assert_eq!(l.warnings.len(), 1);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let line_of = |csv: &str| match read_dataset(csv.as_bytes(), &game()) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected a parse error, got {other:?}"),
        };
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("market_id,x_0,y_0\n"), 1);
        assert_eq!(line_of("market_id,x_0,y_0,y_1\n"), 2);
        assert_eq!(line_of("market_id,x_0,y_0,y_1\na,0,1,0\nb,7,1,0\n"), 3);
        assert_eq!(line_of("market_id,x_0,y_0,y_1\na,0,1,0\nb,0,2,0\n"), 3);
        assert_eq!(line_of("market_id,x_0,y_0,y_1\na,0,1,0\nb,0,1\n"), 3);
    }

    #[test]
    fn workflow_requirements() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_err());
        cfg.apply(Workflow::McPower, &Overrides::default()).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(cfg.apply(Workflow::Test, &Overrides::default()).is_err());
    }
}
