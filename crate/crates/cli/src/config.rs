//! Run configuration: defaults, TOML/JSON files and `EPAUT_` environment overrides.

use std::collections::HashMap;
use std::fmt;
use std::marker::PhantomData;
use std::path::Path;
use std::str::FromStr;

use epaut_core::peakon::{GreensKernel, Kernels, Scheme};
use epaut_core::StructureGroup;
use serde::de::{self, IntoDeserializer, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

/// Environment variables consumed by command-line flags rather than the config tree.
const FLAG_VARS: [&str; 5] = ["EPAUT_CONFIG", "EPAUT_OUT", "EPAUT_SEED", "EPAUT_THREADS", "EPAUT_STRICT"];

#[derive(Debug, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigInvalid(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupChoice {
    U1,
    So3,
    Both,
}

impl GroupChoice {
    pub fn groups(self) -> Vec<StructureGroup> {
        match self {
            GroupChoice::U1 => vec![StructureGroup::Circle],
            GroupChoice::So3 => vec![StructureGroup::Rotation3],
            GroupChoice::Both => vec![StructureGroup::Circle, StructureGroup::Rotation3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Separated peakons on the line with random charges.
    Ensemble,
    /// One peakon with the charge given by `sigma0`; checked against its closed form.
    Single,
}

/// Upper bounds for every asserted quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub orthogonality: f64,
    pub inclusion: f64,
    pub gap_noise: f64,
    pub witness_residual: f64,
    pub witness_split: f64,
    pub chart: f64,
    pub reconstruction: f64,
    pub energy: f64,
    pub charge: f64,
    pub casimir: f64,
    pub closed_form: f64,
    pub order_min: f64,
    pub order_max: f64,
    pub derivative: f64,
    pub fd_step: f64,
    pub cocycle: f64,
    pub noether: f64,
    pub invariance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orthogonality: 1e-8,
            inclusion: 1e-8,
            gap_noise: 0.1,
            witness_residual: 1e-4,
            witness_split: 1e-3,
            chart: 1e-5,
            reconstruction: 1e-6,
            energy: 1e-8,
            charge: 1e-8,
            casimir: 1e-10,
            closed_form: 1e-10,
            order_min: 1.7,
            order_max: 2.3,
            derivative: 1e-6,
            fd_step: 1e-5,
            cocycle: 1e-6,
            noether: 1e-6,
            invariance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub group: GroupChoice,
    /// Ambient dimensions swept by the verification suites.
    #[serde(deserialize_with = "list")]
    pub dims: Vec<usize>,
    /// Grid size for spectral runs (power of two).
    pub n: usize,
    /// Basis truncation.
    pub k: usize,
    #[serde(deserialize_with = "list")]
    pub k_sweep: Vec<usize>,
    /// Random states per verification sweep.
    pub states: usize,

    pub initial: InitialState,
    pub nodes: usize,
    pub sigma_scale: f64,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub scheme: Scheme,
    pub kernels: Kernels,
    /// Single-peakon data: weight, momentum and charge coordinates.
    pub weight: f64,
    pub p0: f64,
    #[serde(deserialize_with = "list")]
    pub sigma0: Vec<f64>,

    /// Step sizes for the weak-consistency order estimate and its time span.
    #[serde(deserialize_with = "list")]
    pub order_dts: Vec<f64>,
    pub order_t_end: f64,

    pub derivative_samples: usize,
    pub cocycle_triples: usize,
    pub noether_n: usize,
    pub noether_flows: usize,
    pub noether_t: f64,
    pub noether_dt: f64,

    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            group: GroupChoice::Both,
            dims: vec![1, 2],
            n: 32,
            k: 8,
            k_sweep: vec![4, 8, 12],
            states: 20,
            initial: InitialState::Ensemble,
            nodes: 5,
            sigma_scale: 0.1,
            dt: 1e-3,
            t_end: 10.0,
            stride: 100,
            scheme: Scheme::Composition4,
            kernels: Kernels::peakon(1.0, 1.0),
            weight: 1.0,
            p0: 1.0,
            sigma0: vec![0.01, 0.0, 0.0],
            order_dts: vec![4e-3, 2e-3, 1e-3],
            order_t_end: 1.0,
            derivative_samples: 50,
            cocycle_triples: 10,
            noether_n: 64,
            noether_flows: 3,
            noether_t: 1.0,
            noether_dt: 1e-3,
            tolerances: Tolerances::default(),
        }
    }
}

/// A list from a sequence, a single number, or a comma-separated string
/// (the forms that arrive from files and environment variables).
fn list<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de> + FromStr,
    T::Err: fmt::Display,
{
    struct ListVisitor<T>(PhantomData<T>);

    impl<'de, T> Visitor<'de> for ListVisitor<T>
    where
        T: Deserialize<'de> + FromStr,
        T::Err: fmt::Display,
    {
        type Value = Vec<T>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a list, a number or a comma-separated string")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<T>, A::Error> {
            let mut out = Vec::new();
            while let Some(v) = seq.next_element()? {
                out.push(v);
            }
            Ok(out)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Vec<T>, E> {
            Ok(vec![T::deserialize(v.into_deserializer())?])
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Vec<T>, E> {
            Ok(vec![T::deserialize(v.into_deserializer())?])
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Vec<T>, E> {
            Ok(vec![T::deserialize(v.into_deserializer())?])
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Vec<T>, E> {
            v.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse().map_err(|e| E::custom(format!("{s:?}: {e}")))).collect()
        }
    }

    d.deserialize_any(ListVisitor(PhantomData))
}

impl RunConfig {
    /// Defaults, then the file at `path` (format from its extension), then
    /// `EPAUT_*` variables from `env` (`__` separates nested keys, `,` list items).
    pub fn load(path: Option<&Path>, env: &HashMap<String, String>) -> Result<Self, ConfigInvalid> {
        let defaults = config::Config::try_from(&RunConfig::default()).map_err(|e| ConfigInvalid(e.to_string()))?;
        let mut builder = config::Config::builder().add_source(defaults);
        if let Some(p) = path {
            if !p.is_file() {
                return Err(ConfigInvalid(format!("config file {} not found", p.display())));
            }
            builder = builder.add_source(config::File::from(p));
        }
        let vars: HashMap<String, String> = env.iter().filter(|(k, _)| k.starts_with("EPAUT_") && !FLAG_VARS.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        builder = builder.add_source(
            config::Environment::with_prefix("EPAUT")
                .prefix_separator("_")
                .separator("__")
                .try_parsing(true)
                .source(Some(vars)),
        );
        let cfg: RunConfig = builder.build().and_then(|c| c.try_deserialize()).map_err(|e| ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigInvalid> {
        let bad = |m: String| Err(ConfigInvalid(m));
        let positive = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { bad(format!("{name} must be positive and finite, got {v}")) };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if !(self.sigma_scale >= 0.0 && self.sigma_scale.is_finite()) {
            return bad(format!("sigma_scale must be >= 0 and finite, got {}", self.sigma_scale));
        }
        positive("order_t_end", self.order_t_end)?;
        positive("noether_t", self.noether_t)?;
        positive("noether_dt", self.noether_dt)?;
        positive("weight", self.weight)?;
        for (i, dt) in self.order_dts.iter().enumerate() {
            positive(&format!("order_dts[{i}]"), *dt)?;
        }
        if self.order_dts.len() < 2 {
            return bad("order_dts needs at least two step sizes".into());
        }
        for (name, n) in [("n", self.n), ("noether_n", self.noether_n)] {
            if n < 8 || !n.is_power_of_two() {
                return bad(format!("{name} must be a power of two >= 8, got {n}"));
            }
        }
        if self.dims.is_empty() || self.dims.iter().any(|d| !(1..=2).contains(d)) {
            return bad(format!("dims must be a non-empty subset of {{1, 2}}, got {:?}", self.dims));
        }
        if self.k == 0 || self.k_sweep.iter().any(|&k| k == 0) {
            return bad("basis truncations must be >= 1".into());
        }
        // composed frequencies must stay below Nyquist
        if let Some(&kmax) = self.k_sweep.iter().chain(std::iter::once(&self.k)).max() {
            if 2 * kmax >= self.n {
                return bad(format!("truncation {kmax} is not resolved on n = {}", self.n));
            }
        }
        for (name, v) in [
            ("states", self.states),
            ("nodes", self.nodes),
            ("stride", self.stride),
            ("derivative_samples", self.derivative_samples),
            ("cocycle_triples", self.cocycle_triples),
            ("noether_flows", self.noether_flows),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if self.sigma0.is_empty() || self.sigma0.len() > 3 || self.sigma0.iter().any(|v| !v.is_finite()) {
            return bad(format!("sigma0 needs 1 to 3 finite coordinates, got {:?}", self.sigma0));
        }
        if !self.p0.is_finite() {
            return bad(format!("p0 must be finite, got {}", self.p0));
        }
        for k in [self.kernels.g1, self.kernels.g2] {
            if let GreensKernel::PeriodicPeakon { .. } = k {
                return bad("simulations run on the line; periodic kernels are not supported here".into());
            }
            k.validate(1).map_err(|e| ConfigInvalid(e.to_string()))?;
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("orthogonality", t.orthogonality),
            ("inclusion", t.inclusion),
            ("gap_noise", t.gap_noise),
            ("witness_residual", t.witness_residual),
            ("witness_split", t.witness_split),
            ("chart", t.chart),
            ("reconstruction", t.reconstruction),
            ("energy", t.energy),
            ("charge", t.charge),
            ("casimir", t.casimir),
            ("closed_form", t.closed_form),
            ("derivative", t.derivative),
            ("fd_step", t.fd_step),
            ("cocycle", t.cocycle),
            ("noether", t.noether),
            ("invariance", t.invariance),
        ] {
            positive(&format!("tolerances.{name}"), v)?;
        }
        if !(t.order_min > 0.0 && t.order_min < t.order_max) {
            return bad(format!("need 0 < order_min < order_max, got [{}, {}]", t.order_min, t.order_max));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::load(None, &HashMap::new()).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("run.toml");
        std::fs::write(&t, "n = 64\ndt = 2e-3\ngroup = \"so3\"\n[tolerances]\nenergy = 1e-9\n[kernels.g1]\nkind = \"gaussian\"\nalpha = 0.5\n").unwrap();
        let j = dir.path().join("run.json");
        std::fs::write(&j, r#"{"n": 64, "dt": 0.002, "group": "so3", "tolerances": {"energy": 1e-9}, "kernels": {"g1": {"kind": "gaussian", "alpha": 0.5}}}"#).unwrap();
        let a = RunConfig::load(Some(&t), &HashMap::new()).unwrap();
        let b = RunConfig::load(Some(&j), &HashMap::new()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n, 64);
        assert_eq!(a.tolerances.energy, 1e-9);
        assert_eq!(a.tolerances.charge, 1e-8);
        assert_eq!(a.kernels.g1, GreensKernel::Gaussian { alpha: 0.5 });
        assert_eq!(a.group, GroupChoice::So3);
    }

    #[test]
    fn environment_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("run.toml");
        std::fs::write(&t, "k = 6\n").unwrap();
        let e = env(&[("EPAUT_K", "4"), ("EPAUT_DIMS", "2"), ("EPAUT_TOLERANCES__CASIMIR", "1e-9"), ("EPAUT_SEED", "ignored"), ("OTHER", "x")]);
        let c = RunConfig::load(Some(&t), &e).unwrap();
        assert_eq!(c.k, 4);
        assert_eq!(c.dims, vec![2]);
        assert_eq!(c.tolerances.casimir, 1e-9);
        let c = RunConfig::load(None, &env(&[("EPAUT_K_SWEEP", "2,4"), ("EPAUT_ORDER_DTS", "0.01, 0.005")])).unwrap();
        assert_eq!(c.k_sweep, vec![2, 4]);
        assert_eq!(c.order_dts, vec![0.01, 0.005]);
        assert!(RunConfig::load(None, &env(&[("EPAUT_DIMS", "1,x")])).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        for body in ["dt = 0.0", "dt = -1e-3", "n = 48", "dims = [3]", "[tolerances]\nenergy = 0.0", "unknown_key = 1", "k = 20"] {
            let t = dir.path().join("bad.toml");
            std::fs::write(&t, body).unwrap();
            assert!(RunConfig::load(Some(&t), &HashMap::new()).is_err(), "{body}");
        }
        assert!(RunConfig::load(Some(Path::new("/nonexistent/run.toml")), &HashMap::new()).is_err());
        assert!(RunConfig::load(None, &env(&[("EPAUT_DT", "0")])).is_err());
    }
}
