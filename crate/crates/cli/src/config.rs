//! Flat `key = value` configuration with typed, model-aware validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use covoter::{
    InitialCondition, Model1Params, Model2Params, Model3Params, ModelParams, OpinionLaw, Process, YLaw,
    ZeroNeighbourRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Bool,
    Text,
    IntList,
    FloatList,
}

/// A declared key. `models` lists the models the key belongs to; empty means
/// the key is model independent.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub models: &'static [u8],
    pub about: &'static str,
}

const fn key(name: &'static str, kind: Kind, models: &'static [u8], about: &'static str) -> KeySpec {
    KeySpec { name, kind, models, about }
}

pub const KEYS: &[KeySpec] = &[
    key("experiment", Kind::Text, &[], "registered experiment name"),
    key("model", Kind::Int, &[], "model selector: 1, 2 or 3"),
    key("n", Kind::Int, &[], "number of vertices"),
    key("T", Kind::Float, &[], "time horizon"),
    key("seed", Kind::Int, &[], "master seed"),
    key("dt", Kind::Float, &[], "observer sampling interval"),
    key("out", Kind::Text, &[], "output directory"),
    key("gamma_pm", Kind::Float, &[1], "rate of + to -"),
    key("gamma_mp", Kind::Float, &[1], "rate of - to +"),
    key("vertex_only", Kind::Bool, &[1], "skip the edge dynamics"),
    key("beta", Kind::Float, &[2, 3], "copy rate"),
    key("q_exp", Kind::Float, &[2], "exponent of the nonlinear edge rule"),
    key("q", Kind::Int, &[3], "number of g-layers (and of r-layers)"),
    key("pi_plus", Kind::Float, &[1, 2], "edge probability between two + vertices"),
    key("pi_minus", Kind::Float, &[1, 2], "edge probability between two - vertices"),
    key("pi_plus_g", Kind::Float, &[3], "g-layer edge probability between + vertices"),
    key("pi_minus_g", Kind::Float, &[3], "g-layer edge probability between - vertices"),
    key("pi_plus_r", Kind::Float, &[3], "r-layer edge probability between + vertices"),
    key("pi_minus_r", Kind::Float, &[3], "r-layer edge probability between - vertices"),
    key("p0", Kind::Float, &[1, 2, 3], "initial edge probability"),
    key("zero_neighbour", Kind::Text, &[2, 3], "isolated vertex rule: keep or coin"),
    key("init_opinion", Kind::Text, &[], "all_plus, all_minus, balanced or bernoulli:<p>"),
    key("init_y", Kind::Text, &[], "uniform or const:<y>"),
    key("cells", Kind::Int, &[], "PDE grid cells"),
    key("pde_dt", Kind::Float, &[], "PDE time step"),
    key("bins", Kind::Int, &[], "histogram bins"),
    key("seeds", Kind::Int, &[], "number of seeds in a sweep"),
    key("n_values", Kind::IntList, &[], "vertex counts of a scaling sweep"),
    key("q_values", Kind::IntList, &[], "layer counts of a sweep"),
    key("times", Kind::FloatList, &[], "snapshot times"),
    key("gamma_pairs", Kind::FloatList, &[], "flattened (gamma_mp, gamma_pm) pairs"),
    key("gammas", Kind::FloatList, &[], "rate values crossed with themselves"),
    key("grid_k", Kind::Int, &[], "reference graphon grid size"),
    key("restarts", Kind::Int, &[], "cut norm lower bound restarts"),
    key("pixels", Kind::Int, &[], "PGM side length"),
    key("k_max", Kind::Int, &[], "highest series index"),
    key("instances", Kind::Int, &[], "random instances"),
    key("blocks", Kind::Int, &[], "blocks per random instance"),
    key("eps", Kind::Float, &[], "consensus tolerance"),
    key("graphon_a", Kind::Text, &[], "first stored graphon (CSV)"),
    key("graphon_b", Kind::Text, &[], "second stored graphon (CSV)"),
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    IntList(Vec<i64>),
    FloatList(Vec<f64>),
}

impl Value {
    pub fn parse(kind: Kind, raw: &str) -> Result<Value> {
        let raw = raw.trim();
        let list = || raw.split(',').map(str::trim).filter(|s| !s.is_empty());
        Ok(match kind {
            Kind::Int => Value::Int(raw.parse()?),
            Kind::Float => Value::Float(raw.parse()?),
            Kind::Bool => Value::Bool(raw.parse()?),
            Kind::Text => Value::Text(raw.to_string()),
            Kind::IntList => Value::IntList(list().map(str::parse).collect::<std::result::Result<_, _>>()?),
            Kind::FloatList => Value::FloatList(list().map(str::parse).collect::<std::result::Result<_, _>>()?),
        })
    }

    pub fn kind(&self) -> Kind {
        match self {
            Value::Int(_) => Kind::Int,
            Value::Float(_) => Kind::Float,
            Value::Bool(_) => Kind::Bool,
            Value::Text(_) => Kind::Text,
            Value::IntList(_) => Kind::IntList,
            Value::FloatList(_) => Kind::FloatList,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => write!(f, "{v}"),
            Value::IntList(v) => write!(f, "{}", join(v)),
            Value::FloatList(v) => write!(f, "{}", join(v)),
        }
    }
}

/// Experiment or run configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    entries: BTreeMap<String, Value>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Config> {
        let mut c = Config::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", no + 1))?;
            c.set(k.trim(), v).with_context(|| format!("line {}", no + 1))?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn serialize(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Sets `key` from its textual form.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let s = key_spec(key).ok_or_else(|| anyhow!("unknown key `{key}`"))?;
        let v = Value::parse(s.kind, raw).map_err(|e| anyhow!("key `{key}`: cannot parse {:?}: {e}", raw.trim()))?;
        self.entries.insert(key.to_string(), v);
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| anyhow!("override {assignment:?} is not key=value"))?;
        self.set(k.trim(), v)
    }

    pub fn insert(&mut self, key: &str, value: Value) -> Result<()> {
        let s = key_spec(key).ok_or_else(|| anyhow!("unknown key `{key}`"))?;
        if s.kind != value.kind() {
            bail!("key `{key}` expects {:?}, got {:?}", s.kind, value.kind());
        }
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    /// Builder form of [`Config::set`] for literal defaults.
    pub fn with(mut self, key: &str, raw: &str) -> Self {
        self.set(key, raw).unwrap_or_else(|e| panic!("bad default {key} = {raw}: {e}"));
        self
    }

    /// Entries of `other` replace those of `self`.
    pub fn merged(mut self, other: &Config) -> Config {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Stringified entries, as embedded in verdicts.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.get(key) {
            Some(Value::Float(v)) => Ok(*v),
            Some(Value::Int(v)) => Ok(*v as f64),
            _ => bail!("missing key `{key}`"),
        }
    }

    pub fn int(&self, key: &str) -> Result<i64> {
        match self.get(key) {
            Some(Value::Int(v)) => Ok(*v),
            _ => bail!("missing key `{key}`"),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.int(key)?;
        usize::try_from(v).map_err(|_| anyhow!("key `{key}` = {v} must be nonnegative"))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> bool {
        match self.get(key) {
            Some(Value::Bool(v)) => *v,
            _ => default,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Text(v)) => Some(v),
            _ => None,
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key) {
            Some(Value::FloatList(v)) => Ok(v.clone()),
            Some(Value::IntList(v)) => Ok(v.iter().map(|&x| x as f64).collect()),
            _ => bail!("missing key `{key}`"),
        }
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        match self.get(key) {
            Some(Value::IntList(v)) => v
                .iter()
                .map(|&x| usize::try_from(x).map_err(|_| anyhow!("key `{key}` has negative entry {x}")))
                .collect(),
            _ => bail!("missing key `{key}`"),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        let s = self.int("seed")?;
        u64::try_from(s).map_err(|_| anyhow!("key `seed` = {s} must be nonnegative"))
    }

    pub fn model(&self) -> Result<u8> {
        match self.int("model")? {
            m @ 1..=3 => Ok(m as u8),
            m => bail!("key `model` = {m} must be 1, 2 or 3"),
        }
    }

    /// Rejects keys that belong to a model other than the selected one.
    pub fn check_model_keys(&self) -> Result<()> {
        let model = if self.contains("model") { Some(self.model()?) } else { None };
        for (k, _) in self.entries() {
            let s = key_spec(k).expect("entries are declared keys");
            if s.models.is_empty() {
                continue;
            }
            match model {
                Some(m) if s.models.contains(&m) => {}
                Some(m) => bail!("key `{k}` is not a parameter of model {m}"),
                None => bail!("key `{k}` requires `model` to be set"),
            }
        }
        Ok(())
    }

    /// Parameters of the selected model, with the reference defaults for missing keys.
    pub fn model_params(&self) -> Result<ModelParams> {
        self.check_model_keys()?;
        let or = |k: &str, d: f64| if self.contains(k) { self.f64(k) } else { Ok(d) };
        let params = match self.model()? {
            1 => ModelParams::Model1(Model1Params {
                gamma_pm: or("gamma_pm", 1.5)?,
                gamma_mp: or("gamma_mp", 1.0)?,
                pi_plus: or("pi_plus", 0.9)?,
                pi_minus: or("pi_minus", 0.1)?,
                p0: or("p0", 0.05)?,
            }),
            2 => ModelParams::Model2(Model2Params {
                beta: or("beta", 0.66)?,
                pi_plus: or("pi_plus", 0.9)?,
                pi_minus: or("pi_minus", 0.1)?,
                p0: or("p0", 0.05)?,
                q_exp: or("q_exp", 1.0)?,
            }),
            _ => {
                let q = if self.contains("q") { self.int("q")? } else { 1 };
                ModelParams::Model3(Model3Params {
                    beta: or("beta", 0.5)?,
                    q: u32::try_from(q).map_err(|_| anyhow!("key `q` = {q} out of range"))?,
                    pi_plus_g: or("pi_plus_g", 0.9)?,
                    pi_minus_g: or("pi_minus_g", 0.1)?,
                    pi_plus_r: or("pi_plus_r", 0.1)?,
                    pi_minus_r: or("pi_minus_r", 0.9)?,
                    p0: or("p0", 0.05)?,
                })
            }
        };
        params.validate().map_err(|e| anyhow!("invalid model parameters: {e}"))?;
        Ok(params)
    }

    pub fn zero_rule(&self) -> Result<ZeroNeighbourRule> {
        match self.text("zero_neighbour").unwrap_or("keep") {
            "keep" => Ok(ZeroNeighbourRule::Keep),
            "coin" => Ok(ZeroNeighbourRule::FairCoin),
            other => bail!("key `zero_neighbour` = {other:?} must be keep or coin"),
        }
    }

    pub fn process(&self) -> Result<Process> {
        let zero_rule = self.zero_rule()?;
        Ok(match self.model_params()? {
            ModelParams::Model1(params) => Process::Model1 { params, vertex_only: self.bool_or("vertex_only", false) },
            ModelParams::Model2(params) => Process::Model2 { params, zero_rule },
            ModelParams::Model3(params) => Process::Model3 { params, zero_rule },
        })
    }

    pub fn opinion_law(&self) -> Result<OpinionLaw> {
        let raw = self.text("init_opinion").unwrap_or("bernoulli:0.5");
        let law = match raw {
            "all_plus" => OpinionLaw::AllPlus,
            "all_minus" => OpinionLaw::AllMinus,
            "balanced" => OpinionLaw::Balanced,
            _ => match raw.strip_prefix("bernoulli:").map(str::parse::<f64>) {
                Some(Ok(p)) if (0.0..=1.0).contains(&p) => OpinionLaw::Bernoulli(p),
                _ => bail!("key `init_opinion` = {raw:?} is not all_plus, all_minus, balanced or bernoulli:<p>"),
            },
        };
        Ok(law)
    }

    pub fn y_law(&self) -> Result<YLaw> {
        let raw = self.text("init_y").unwrap_or("uniform");
        if raw == "uniform" {
            return Ok(YLaw::Uniform);
        }
        match raw.strip_prefix("const:").map(str::parse::<f64>) {
            Some(Ok(y)) if (0.0..=1.0).contains(&y) => Ok(YLaw::Constant(y)),
            _ => bail!("key `init_y` = {raw:?} is not uniform or const:<y> with y in [0, 1]"),
        }
    }

    /// Expected initial fraction of `Plus` under the opinion law.
    pub fn initial_plus(&self) -> Result<f64> {
        Ok(match self.opinion_law()? {
            OpinionLaw::AllPlus => 1.0,
            OpinionLaw::AllMinus => 0.0,
            OpinionLaw::Balanced => 0.5,
            OpinionLaw::Bernoulli(p) => p,
        })
    }

    pub fn initial_condition(&self) -> Result<InitialCondition> {
        let init = InitialCondition::new(self.usize("n")?, self.opinion_law()?, self.y_law()?);
        init.validate().map_err(|e| anyhow!("key `n`: {e}"))?;
        Ok(init)
    }

    /// Full validation for a simulation run.
    pub fn validate_run(&self) -> Result<()> {
        self.process()?;
        self.initial_condition()?;
        let t = self.f64("T")?;
        if !(t >= 0.0 && t.is_finite()) {
            bail!("key `T` = {t} must be finite and nonnegative");
        }
        let dt = self.f64("dt")?;
        if !(dt > 0.0) {
            bail!("key `dt` = {dt} must be positive");
        }
        self.seed()?;
        Ok(())
    }
}
