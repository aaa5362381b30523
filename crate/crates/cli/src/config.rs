//! Run configuration: a TOML file with optional `[params]`, `[table1]`,
//! `[sweep]` and `[wigner]` sections. Every problem in the file is collected
//! into one report; unknown sections and keys are errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use clap::ValueEnum;
use optoweak_core::params::{KerrConvention, ParamsSpec, SystemParams};
use optoweak_core::wigner::GridSpec;
use toml::{Table, Value};

use crate::error::CliError;

/// Post-selection magnitudes of the published table.
pub const TABLE1_DELTAS: [f64; 6] = [0.5, 0.4, 0.3, 0.2, 0.1, 0.09];
pub const DEFAULT_PHIS: [f64; 2] = [1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Weak regime: ϕ = 1e-3, δ = 5e-2.
    Fig5,
    /// Optimal post-selection: ϕ = 1e-3, δ = ϕ/2.
    Fig6,
    /// State chosen by `[wigner] state` at the configured parameters.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CustomState {
    /// Dark-port meter state at the configured parameters.
    Meter,
    Ground,
    OnePhonon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signs {
    Positive,
    Negative,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Options {
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Signed post-selection parameters, in output order.
    pub deltas: Vec<f64>,
    pub phis: Vec<f64>,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerOptions {
    pub scenario: Scenario,
    pub state: CustomState,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub table1: Table1Options,
    pub sweep: SweepOptions,
    pub wigner: WignerOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse("").expect("empty config is valid")
    }
}

/// Default sweep magnitudes: mantissas 1, 1.5, 2, 3, …, 9 on the decades
/// starting at 1e-6 up to 0.09, then 0.1, 0.15, 0.2, 0.3, …, 0.7.
pub fn default_magnitudes() -> Vec<f64> {
    const MANTISSAS: [f64; 10] = [1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
    let mut out = Vec::new();
    for exp in (2..=6).rev() {
        // dividing by an exact power of ten keeps e.g. 5e-5 correctly rounded
        let decade = 10f64.powi(exp);
        out.extend(MANTISSAS.iter().map(|m| m / decade));
    }
    out.extend([0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]);
    out
}

fn signed(magnitudes: &[f64], signs: Signs) -> Vec<f64> {
    let neg = magnitudes.iter().rev().map(|m| -m);
    match signs {
        Signs::Positive => magnitudes.to_vec(),
        Signs::Negative => neg.collect(),
        Signs::Both => neg.chain(magnitudes.iter().copied()).collect(),
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

/// Typed access to one section, remembering which keys were read.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    used: BTreeSet<&'static str>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str, errors: &mut Vec<String>) -> Self {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                errors.push(format!("`{name}` must be a section"));
                None
            }
        };
        Self { name, table, used: BTreeSet::new() }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.and_then(|t| t.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn expect<T>(&mut self, key: &'static str, what: &str, errors: &mut Vec<String>, f: impl Fn(&Value) -> Option<T>) -> Option<T> {
        let name = self.name;
        let v = self.raw(key)?;
        let out = f(v);
        if out.is_none() {
            errors.push(format!("{name}.{key}: expected {what}, got `{v}`"));
        }
        out
    }

    fn float(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<f64> {
        self.expect(key, "a number", errors, as_float)
    }

    fn uint(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<u64> {
        self.expect(key, "a non-negative integer", errors, |v| v.as_integer().and_then(|i| u64::try_from(i).ok()))
    }

    fn boolean(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<bool> {
        self.expect(key, "true or false", errors, Value::as_bool)
    }

    fn string(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<String> {
        self.expect(key, "a string", errors, |v| v.as_str().map(str::to_owned))
    }

    fn floats(&mut self, key: &'static str, errors: &mut Vec<String>) -> Option<Vec<f64>> {
        self.expect(key, "a non-empty array of numbers", errors, |v| {
            let items: Option<Vec<f64>> = v.as_array()?.iter().map(as_float).collect();
            items.filter(|xs| !xs.is_empty())
        })
    }

    fn finish(self, errors: &mut Vec<String>) {
        if let Some(t) = self.table {
            for key in t.keys() {
                if !self.used.contains(key.as_str()) {
                    errors.push(format!("unknown key `{}.{key}`", self.name));
                }
            }
        }
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

const SECTIONS: [&str; 4] = ["params", "table1", "sweep", "wigner"];

/// Parse and validate a configuration, reporting every problem at once.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(vec![e.to_string()]))?;
    let mut errors = Vec::new();
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            errors.push(format!("unknown section `{key}`"));
        }
    }

    let params = parse_params(&root, &mut errors);
    let table1 = parse_table1(&root, &mut errors);
    let sweep = parse_sweep(&root, &mut errors);
    let wigner = parse_wigner(&root, &mut errors);

    match params {
        Some(params) if errors.is_empty() => Ok(RunConfig {
            params,
            table1,
            sweep,
            wigner,
        }),
        _ => Err(CliError::Config(errors)),
    }
}

fn parse_params(root: &Table, errors: &mut Vec<String>) -> Option<SystemParams> {
    let mut s = Section::new(root, "params", errors);
    let mut spec = ParamsSpec::default();
    let explicit_timing = s.has("xi") || s.has("tau");
    if explicit_timing && !s.has("sideband_index") {
        spec.sideband_index = None;
    }
    let omega = s.float("omega_m", errors);
    if let Some(w) = omega {
        spec.omega_m = w;
    }
    let g0 = s.float("g0", errors);
    let phi = s.float("phi", errors);
    match (g0, phi) {
        (Some(_), Some(_)) => errors.push("params: give either g0 or phi, not both".into()),
        (Some(g), None) => spec.g0 = g,
        (None, Some(p)) => spec.g0 = p * spec.omega_m,
        (None, None) => {}
    }
    spec.xi = s.float("xi", errors);
    spec.tau = s.float("tau", errors);
    if let Some(d) = s.float("delta", errors) {
        spec.delta = d;
    }
    if let Some(n) = s.uint("n_max", errors) {
        spec.n_max = n as usize;
    }
    if let Some(n) = s.uint("sideband_index", errors) {
        match u32::try_from(n) {
            Ok(n) => spec.sideband_index = Some(n),
            Err(_) => errors.push(format!("params.sideband_index: {n} is too large")),
        }
    }
    if let Some(b) = s.boolean("raw_xi", errors) {
        spec.raw_xi = b;
    }
    if let Some(k) = s.string("kerr", errors) {
        match k.as_str() {
            "disentangled" => spec.kerr = KerrConvention::Disentangled,
            "as_printed" => spec.kerr = KerrConvention::AsPrinted,
            other => errors.push(format!("params.kerr: expected \"disentangled\" or \"as_printed\", got \"{other}\"")),
        }
    }
    s.finish(errors);
    match spec.build() {
        Ok(p) => Some(p),
        Err(optoweak_core::Error::InvalidParams(list)) => {
            errors.extend(list.into_iter().map(|e| format!("params: {e}")));
            None
        }
        Err(e) => {
            errors.push(format!("params: {e}"));
            None
        }
    }
}

fn check_deltas(section: &str, deltas: &[f64], errors: &mut Vec<String>) {
    for &d in deltas {
        if !d.is_finite() || d == 0.0 || d.abs() > optoweak_core::params::DELTA_MAX {
            errors.push(format!("{section}: delta {d} must be nonzero with |delta| <= 1/sqrt(2)"));
        }
    }
}

fn parse_table1(root: &Table, errors: &mut Vec<String>) -> Table1Options {
    let mut s = Section::new(root, "table1", errors);
    let deltas = s.floats("deltas", errors).unwrap_or_else(|| TABLE1_DELTAS.to_vec());
    s.finish(errors);
    check_deltas("table1", &deltas, errors);
    Table1Options { deltas }
}

fn parse_sweep(root: &Table, errors: &mut Vec<String>) -> SweepOptions {
    let mut s = Section::new(root, "sweep", errors);
    let explicit = s.floats("deltas", errors);
    let magnitudes = s.floats("magnitudes", errors);
    let signs = match s.string("signs", errors).as_deref() {
        None | Some("both") => Signs::Both,
        Some("positive") => Signs::Positive,
        Some("negative") => Signs::Negative,
        Some(other) => {
            errors.push(format!("sweep.signs: expected \"positive\", \"negative\" or \"both\", got \"{other}\""));
            Signs::Both
        }
    };
    let phis = s.floats("phis", errors).unwrap_or_else(|| DEFAULT_PHIS.to_vec());
    let svg = s.boolean("svg", errors).unwrap_or(false);
    let deltas = match (explicit, magnitudes) {
        (Some(_), Some(_)) => {
            errors.push("sweep: give either deltas or magnitudes, not both".into());
            Vec::new()
        }
        (Some(d), None) => d,
        (None, Some(m)) => {
            if m.iter().any(|&x| x < 0.0) {
                errors.push("sweep.magnitudes must be non-negative".into());
            }
            signed(&m, signs)
        }
        (None, None) => signed(&default_magnitudes(), signs),
    };
    s.finish(errors);
    check_deltas("sweep", &deltas, errors);
    for &p in &phis {
        if !(p.is_finite() && p > 0.0) {
            errors.push(format!("sweep: phi {p} must be positive"));
        }
    }
    SweepOptions { deltas, phis, svg }
}

fn parse_wigner(root: &Table, errors: &mut Vec<String>) -> WignerOptions {
    let mut s = Section::new(root, "wigner", errors);
    let scenario = match s.string("scenario", errors).as_deref() {
        None | Some("fig5") => Scenario::Fig5,
        Some("fig6") => Scenario::Fig6,
        Some("custom") => Scenario::Custom,
        Some(other) => {
            errors.push(format!("wigner.scenario: expected \"fig5\", \"fig6\" or \"custom\", got \"{other}\""));
            Scenario::Fig5
        }
    };
    let state = match s.string("state", errors).as_deref() {
        None | Some("meter") => CustomState::Meter,
        Some("ground") => CustomState::Ground,
        Some("one_phonon") => CustomState::OnePhonon,
        Some(other) => {
            errors.push(format!("wigner.state: expected \"meter\", \"ground\" or \"one_phonon\", got \"{other}\""));
            CustomState::Meter
        }
    };
    let mut grid = GridSpec::default();
    let x_min = s.float("x_min", errors);
    let x_max = s.float("x_max", errors);
    let y_min = s.float("y_min", errors);
    let y_max = s.float("y_max", errors);
    grid.x_range = (x_min.unwrap_or(grid.x_range.0), x_max.unwrap_or(grid.x_range.1));
    grid.y_range = (y_min.unwrap_or(grid.y_range.0), y_max.unwrap_or(grid.y_range.1));
    if let Some(n) = s.uint("resolution", errors) {
        grid.resolution = n as usize;
    }
    s.finish(errors);
    if grid.validate().is_err() {
        errors.push(format!(
            "wigner: grid needs finite ranges with min < max and resolution >= 2 (got {:?} x {:?}, {})",
            grid.x_range, grid.y_range, grid.resolution
        ));
    }
    WignerOptions { scenario, state, grid }
}
