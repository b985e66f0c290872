//! JSON run configuration and the command runner behind the `rllforge` binary.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::currents::{check_psi_compatibility, delta_normalization, N_CONVENTION};
use crate::family::{apply_rho, check_rho_admissible, tau, FamilyOrbit, RhoSpec, Sequence, Sign};
use crate::report::CheckReport;
use crate::reps::{check_commuting, trace_transfer, EvalL, LOperator};
use crate::rll_verify::{verify_components_with, verify_ef_relations, Faults, VerifyOptions};
use crate::rmatrix::{
    builtin_rational, builtin_trig, check_unitarity, check_ybe, identity_r, Entry, EntryFn, Grading, Params,
    StructuredR, DEFAULT_POLE_GUARD, DEFAULT_TOLERANCE,
};
use crate::sampling::SamplingSpec;
use crate::C64;

pub const SEED_ENV: &str = "RLLFORGE_SEED";

#[derive(Clone, Debug, PartialEq, Error)]
#[error("config error at {pointer}: {message}")]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

fn cerr(pointer: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { pointer: pointer.into(), message: message.into() }
}

/// Polynomial numerator and denominator in `u`, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalEntry {
    pub num: Vec<C64>,
    pub den: Vec<C64>,
}

fn horner(coeffs: &[C64], u: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * u + c)
}

impl RationalEntry {
    fn entry_fn(&self) -> EntryFn {
        let (num, den) = (self.num.clone(), self.den.clone());
        let den2 = den.clone();
        EntryFn::new(move |u, _| horner(&num, u) / horner(&den, u)).with_pole(move |u, _| horner(&den2, u).norm())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RSource {
    Builtin { name: String, eta: C64, hbar: C64 },
    Table { entries: BTreeMap<Entry, RationalEntry>, eta: C64, hbar: C64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleCounts {
    pub count: usize,
    pub triples: usize,
    pub tag_pairs: usize,
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Default for SampleCounts {
    fn default() -> Self {
        SampleCounts { count: 100, triples: 50, tag_pairs: 20, re: (-2.0, 2.0), im: (-2.0, 2.0) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub r_matrix: RSource,
    pub rho: RhoSpec,
    pub range: (i64, i64),
    pub pair: (i64, i64),
    pub epsilon: Grading,
    pub central_charge: C64,
    pub samples: SampleCounts,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub pole_guard: f64,
    pub output: Option<String>,
    pub inject_fault: Option<String>,
    pub transfer_sites: usize,
    pub inhomogeneities: Vec<C64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            r_matrix: RSource::Builtin { name: "trig".into(), eta: C64::new(1.0 / PI, 0.0), hbar: C64::new(0.3, 0.0) },
            rho: RhoSpec::phase_shift(C64::new(0.1, 0.0)),
            range: (-3, 3),
            pair: (0, 1),
            epsilon: Grading::Even,
            central_charge: C64::new(1.0, 0.0),
            samples: SampleCounts::default(),
            seed: None,
            tolerance: DEFAULT_TOLERANCE,
            pole_guard: DEFAULT_POLE_GUARD,
            output: None,
            inject_fault: None,
            transfer_sites: 3,
            inhomogeneities: Vec::new(),
        }
    }
}

const KNOWN_FAULTS: [&str; 1] = ["invert_k1k2_ratio"];
const TOP_KEYS: [&str; 14] = [
    "r_matrix",
    "rho",
    "range",
    "pair",
    "epsilon",
    "central_charge",
    "samples",
    "seed",
    "tolerance",
    "pole_guard",
    "output",
    "inject_fault",
    "transfer",
    "$comment",
];

fn complex_value(z: C64) -> Value {
    json!([z.re, z.im])
}

fn parse_complex(v: &Value, ptr: &str) -> Result<C64, ConfigError> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| C64::new(x, 0.0)).ok_or_else(|| cerr(ptr, "not a finite number")),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| cerr(format!("{ptr}/0"), "expected a number"))?;
            let im = a[1].as_f64().ok_or_else(|| cerr(format!("{ptr}/1"), "expected a number"))?;
            Ok(C64::new(re, im))
        }
        _ => Err(cerr(ptr, "expected a complex number [re, im]")),
    }
}

fn parse_f64(v: &Value, ptr: &str) -> Result<f64, ConfigError> {
    v.as_f64().ok_or_else(|| cerr(ptr, "expected a number"))
}

fn parse_positive(v: &Value, ptr: &str) -> Result<f64, ConfigError> {
    let x = parse_f64(v, ptr)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(cerr(ptr, "must be a positive finite number"));
    }
    Ok(x)
}

fn parse_usize(v: &Value, ptr: &str) -> Result<usize, ConfigError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| cerr(ptr, "expected a nonnegative integer"))
}

fn parse_i64_pair(v: &Value, ptr: &str) -> Result<(i64, i64), ConfigError> {
    match v.as_array() {
        Some(a) if a.len() == 2 => {
            let x = a[0].as_i64().ok_or_else(|| cerr(format!("{ptr}/0"), "expected an integer"))?;
            let y = a[1].as_i64().ok_or_else(|| cerr(format!("{ptr}/1"), "expected an integer"))?;
            Ok((x, y))
        }
        _ => Err(cerr(ptr, "expected a two-element integer array")),
    }
}

fn parse_f64_pair(v: &Value, ptr: &str) -> Result<(f64, f64), ConfigError> {
    match v.as_array() {
        Some(a) if a.len() == 2 => {
            let x = parse_f64(&a[0], &format!("{ptr}/0"))?;
            let y = parse_f64(&a[1], &format!("{ptr}/1"))?;
            if x > y {
                return Err(cerr(ptr, "lower bound exceeds upper bound"));
            }
            Ok((x, y))
        }
        _ => Err(cerr(ptr, "expected a two-element number array")),
    }
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>, ConfigError> {
    v.as_object().ok_or_else(|| cerr(ptr, "expected an object"))
}

fn reject_unknown(obj: &Map<String, Value>, ptr: &str, known: &[&str]) -> Result<(), ConfigError> {
    for k in obj.keys() {
        if !known.contains(&k.as_str()) {
            return Err(cerr(format!("{ptr}/{k}"), "unknown field"));
        }
    }
    Ok(())
}

fn parse_poly(v: &Value, ptr: &str) -> Result<Vec<C64>, ConfigError> {
    let a = v.as_array().ok_or_else(|| cerr(ptr, "expected an array of coefficients"))?;
    if a.is_empty() {
        return Err(cerr(ptr, "polynomial needs at least one coefficient"));
    }
    a.iter().enumerate().map(|(k, c)| parse_complex(c, &format!("{ptr}/{k}"))).collect()
}

fn parse_r(v: &Value) -> Result<RSource, ConfigError> {
    let ptr = "/r_matrix";
    let obj = object(v, ptr)?;
    reject_unknown(obj, ptr, &["builtin", "eta", "hbar", "entries"])?;
    let get_c = |k: &str, default: Option<C64>| -> Result<C64, ConfigError> {
        match obj.get(k) {
            Some(x) => parse_complex(x, &format!("{ptr}/{k}")),
            None => default.ok_or_else(|| cerr(format!("{ptr}/{k}"), "missing field")),
        }
    };
    match (obj.get("builtin"), obj.get("entries")) {
        (Some(_), Some(_)) => Err(cerr(ptr, "give either builtin or entries, not both")),
        (Some(b), None) => {
            let name = b.as_str().ok_or_else(|| cerr(format!("{ptr}/builtin"), "expected a string"))?;
            let zero = C64::new(0.0, 0.0);
            let (eta, hbar) = match name {
                "trig" => (get_c("eta", None)?, get_c("hbar", None)?),
                "rational" => (get_c("eta", Some(zero))?, get_c("hbar", None)?),
                "identity" => (get_c("eta", Some(zero))?, get_c("hbar", Some(zero))?),
                other => return Err(cerr(format!("{ptr}/builtin"), format!("unknown builtin {other:?}"))),
            };
            Ok(RSource::Builtin { name: name.into(), eta, hbar })
        }
        (None, Some(e)) => {
            let eptr = format!("{ptr}/entries");
            let eobj = object(e, &eptr)?;
            let mut entries = BTreeMap::new();
            for entry in Entry::ALL {
                let p = format!("{eptr}/{}", entry.name());
                let ev = eobj.get(entry.name()).ok_or_else(|| cerr(&p, "missing entry"))?;
                let o = object(ev, &p)?;
                reject_unknown(o, &p, &["num", "den"])?;
                let num = parse_poly(o.get("num").ok_or_else(|| cerr(format!("{p}/num"), "missing field"))?, &format!("{p}/num"))?;
                let den = match o.get("den") {
                    Some(d) => parse_poly(d, &format!("{p}/den"))?,
                    None => vec![C64::new(1.0, 0.0)],
                };
                if den.iter().all(|c| *c == C64::new(0.0, 0.0)) {
                    return Err(cerr(format!("{p}/den"), "denominator is identically zero"));
                }
                entries.insert(entry, RationalEntry { num, den });
            }
            reject_unknown(eobj, &eptr, &["a", "b", "c", "d", "s", "t"])?;
            let zero = C64::new(0.0, 0.0);
            Ok(RSource::Table { entries, eta: get_c("eta", Some(zero))?, hbar: get_c("hbar", Some(zero))? })
        }
        (None, None) => Err(cerr(ptr, "needs builtin or entries")),
    }
}

fn parse_rho(v: &Value) -> Result<RhoSpec, ConfigError> {
    serde_json::from_value::<RhoSpec>(v.clone()).map_err(|e| cerr("/rho", e.to_string()))
}

fn parse_samples(v: &Value) -> Result<SampleCounts, ConfigError> {
    let ptr = "/samples";
    let obj = object(v, ptr)?;
    reject_unknown(obj, ptr, &["count", "triples", "tag_pairs", "box"])?;
    let mut s = SampleCounts::default();
    if let Some(x) = obj.get("count") {
        s.count = parse_usize(x, "/samples/count")?;
    }
    if let Some(x) = obj.get("triples") {
        s.triples = parse_usize(x, "/samples/triples")?;
    }
    if let Some(x) = obj.get("tag_pairs") {
        s.tag_pairs = parse_usize(x, "/samples/tag_pairs")?;
    }
    if let Some(b) = obj.get("box") {
        let bo = object(b, "/samples/box")?;
        reject_unknown(bo, "/samples/box", &["re", "im"])?;
        if let Some(x) = bo.get("re") {
            s.re = parse_f64_pair(x, "/samples/box/re")?;
        }
        if let Some(x) = bo.get("im") {
            s.im = parse_f64_pair(x, "/samples/box/im")?;
        }
    }
    Ok(s)
}

impl RunConfig {
    /// Validates a JSON config. Absent optional fields take their defaults; errors name
    /// the offending field by JSON pointer.
    pub fn from_value(v: &Value) -> Result<RunConfig, ConfigError> {
        let obj = object(v, "")?;
        reject_unknown(obj, "", &TOP_KEYS)?;
        let mut cfg = RunConfig::default();
        if let Some(x) = obj.get("r_matrix") {
            cfg.r_matrix = parse_r(x)?;
        }
        if let Some(x) = obj.get("rho") {
            cfg.rho = parse_rho(x)?;
        }
        if let Some(x) = obj.get("range") {
            cfg.range = parse_i64_pair(x, "/range")?;
            if cfg.range.0 > 0 || cfg.range.1 < 0 {
                return Err(cerr("/range", "range must contain 0"));
            }
        }
        if let Some(x) = obj.get("pair") {
            cfg.pair = parse_i64_pair(x, "/pair")?;
            for (k, n) in [cfg.pair.0, cfg.pair.1].into_iter().enumerate() {
                if n < cfg.range.0 || n > cfg.range.1 {
                    return Err(cerr(format!("/pair/{k}"), "index outside range"));
                }
            }
        }
        if let Some(x) = obj.get("epsilon") {
            cfg.epsilon = x
                .as_i64()
                .and_then(|s| Grading::from_sign(s as i32))
                .ok_or_else(|| cerr("/epsilon", "must be 1 or -1"))?;
        }
        if let Some(x) = obj.get("central_charge") {
            cfg.central_charge = parse_complex(x, "/central_charge")?;
        }
        if let Some(x) = obj.get("samples") {
            cfg.samples = parse_samples(x)?;
        }
        if let Some(x) = obj.get("seed") {
            cfg.seed = Some(x.as_u64().ok_or_else(|| cerr("/seed", "expected a nonnegative integer"))?);
        }
        if let Some(x) = obj.get("tolerance") {
            cfg.tolerance = parse_positive(x, "/tolerance")?;
        }
        if let Some(x) = obj.get("pole_guard") {
            cfg.pole_guard = parse_positive(x, "/pole_guard")?;
        }
        if let Some(x) = obj.get("output") {
            cfg.output = Some(x.as_str().ok_or_else(|| cerr("/output", "expected a string"))?.to_string());
        }
        if let Some(x) = obj.get("inject_fault") {
            let f = x.as_str().ok_or_else(|| cerr("/inject_fault", "expected a string"))?;
            if !KNOWN_FAULTS.contains(&f) {
                return Err(cerr("/inject_fault", format!("unknown fault {f:?}")));
            }
            cfg.inject_fault = Some(f.to_string());
        }
        if let Some(t) = obj.get("transfer") {
            let to = object(t, "/transfer")?;
            reject_unknown(to, "/transfer", &["sites", "inhomogeneities"])?;
            if let Some(x) = to.get("sites") {
                cfg.transfer_sites = parse_usize(x, "/transfer/sites")?;
                if cfg.transfer_sites == 0 {
                    return Err(cerr("/transfer/sites", "need at least one site"));
                }
            }
            if let Some(x) = to.get("inhomogeneities") {
                let a = x.as_array().ok_or_else(|| cerr("/transfer/inhomogeneities", "expected an array"))?;
                cfg.inhomogeneities = a
                    .iter()
                    .enumerate()
                    .map(|(k, z)| parse_complex(z, &format!("/transfer/inhomogeneities/{k}")))
                    .collect::<Result<_, _>>()?;
            }
        }
        Ok(cfg)
    }

    pub fn from_json(s: &str) -> Result<RunConfig, ConfigError> {
        let v: Value = serde_json::from_str(s).map_err(|e| cerr("", format!("invalid JSON: {e}")))?;
        RunConfig::from_value(&v)
    }

    pub fn to_value(&self) -> Value {
        let r = match &self.r_matrix {
            RSource::Builtin { name, eta, hbar } => {
                json!({"builtin": name, "eta": complex_value(*eta), "hbar": complex_value(*hbar)})
            }
            RSource::Table { entries, eta, hbar } => {
                let mut m = Map::new();
                for (e, re) in entries {
                    m.insert(
                        e.name().into(),
                        json!({
                            "num": re.num.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
                            "den": re.den.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
                        }),
                    );
                }
                json!({"entries": m, "eta": complex_value(*eta), "hbar": complex_value(*hbar)})
            }
        };
        let mut v = json!({
            "r_matrix": r,
            "rho": serde_json::to_value(&self.rho).expect("rho serialization"),
            "range": [self.range.0, self.range.1],
            "pair": [self.pair.0, self.pair.1],
            "epsilon": self.epsilon.as_i32(),
            "central_charge": complex_value(self.central_charge),
            "samples": {
                "count": self.samples.count,
                "triples": self.samples.triples,
                "tag_pairs": self.samples.tag_pairs,
                "box": {"re": [self.samples.re.0, self.samples.re.1], "im": [self.samples.im.0, self.samples.im.1]},
            },
            "tolerance": self.tolerance,
            "pole_guard": self.pole_guard,
            "transfer": {
                "sites": self.transfer_sites,
                "inhomogeneities": self.inhomogeneities.iter().map(|z| complex_value(*z)).collect::<Vec<_>>(),
            },
        });
        let o = v.as_object_mut().expect("object");
        if let Some(s) = self.seed {
            o.insert("seed".into(), json!(s));
        }
        if let Some(p) = &self.output {
            o.insert("output".into(), json!(p));
        }
        if let Some(f) = &self.inject_fault {
            o.insert("inject_fault".into(), json!(f));
        }
        v
    }

    pub fn build_r(&self) -> Result<StructuredR, ConfigError> {
        let r = match &self.r_matrix {
            RSource::Builtin { name, eta, hbar } => match name.as_str() {
                "trig" => builtin_trig(*eta, *hbar).map_err(|e| cerr("/r_matrix", e.to_string()))?,
                "rational" => builtin_rational(*hbar).map_err(|e| cerr("/r_matrix", e.to_string()))?,
                _ => identity_r(),
            },
            RSource::Table { entries, eta, hbar } => {
                let f = |e: Entry| entries[&e].entry_fn();
                StructuredR::new(
                    "table",
                    [f(Entry::A), f(Entry::B), f(Entry::C), f(Entry::D), f(Entry::S), f(Entry::T)],
                    Params::new(*eta, *hbar),
                )
            }
        };
        Ok(r.with_grading(self.epsilon).with_pole_guard(self.pole_guard))
    }

    pub fn build_orbit(&self) -> Result<FamilyOrbit, ConfigError> {
        let orbit = FamilyOrbit::new(self.build_r()?, self.rho.clone(), self.range)
            .map_err(|e| cerr("/range", e.to_string()))?;
        Ok(orbit.with_charges(Sequence::constant(self.central_charge)))
    }

    fn spec(&self, count: usize, seed: u64) -> SamplingSpec {
        SamplingSpec::new(count, seed).with_box(self.samples.re, self.samples.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Unitarity and Yang-Baxter checks of the configured R-matrix.
    CheckR,
    /// Orbit generation, inverse-rule exactness, composition laws and admissibility.
    Orbit,
    /// Structure functions, delta normalization and their compatibility.
    Currents,
    /// Reduction of all RLL components with the current-relation rules.
    VerifyRll,
    /// The k–E/F exchange relations.
    VerifyEf,
    /// Commutativity of traced transfer operators.
    Transfer,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckR => "check-r",
            Command::Orbit => "orbit",
            Command::Currents => "currents",
            Command::VerifyRll => "verify-rll",
            Command::VerifyEf => "verify-ef",
            Command::Transfer => "transfer",
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct GlobalOpts {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed; overrides the config file and the RLLFORGE_SEED environment variable.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance; overrides the config file.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Do not print the report to stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Parser)]
#[command(name = "rllforge", version, about = "Verify generalized RLL relations over structured R-matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

/// Seed precedence: explicit flag, then config, then environment.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<u64, ConfigError> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match env {
        Some(s) => s.trim().parse().map_err(|_| cerr("/seed", format!("{SEED_ENV}={s:?} is not an integer"))),
        None => Err(cerr("/seed", format!("missing seed (set it in the config, pass --seed, or set {SEED_ENV})"))),
    }
}

fn member_params(orbit: &FamilyOrbit) -> (Vec<(String, C64)>, Vec<String>) {
    let mut params = Vec::new();
    let mut errors = Vec::new();
    for n in orbit.indices() {
        match orbit.member(n) {
            Ok(r) => {
                params.push((format!("eta^({n})"), r.params().eta));
                params.push((format!("hbar^({n})"), r.params().hbar));
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    (params, errors)
}

/// Exactness of `ρ⁻ ∘ ρ⁺` at every index and of the `τ` composition laws.
fn orbit_laws(orbit: &FamilyOrbit, seed: u64) -> CheckReport {
    let mut b = CheckReport::builder("orbit_laws", 0.0, seed);
    let (lo, hi) = orbit.range();
    for n in lo..=hi {
        let res = (|| {
            let r = orbit.member(n)?;
            let up = apply_rho(orbit.rho(), Sign::Plus, n, &r)?;
            let back = apply_rho(orbit.rho(), Sign::Minus, n + 1, &up)?;
            let down = apply_rho(orbit.rho(), Sign::Minus, n, &r)?;
            let fwd = apply_rho(orbit.rho(), Sign::Plus, n - 1, &down)?;
            Ok::<_, crate::family::FamilyError>(back.params() == r.params() && fwd.params() == r.params())
        })();
        match res {
            Ok(true) => b.record(&[], 0.0, None),
            Ok(false) => b.record(&[], f64::INFINITY, Some(format!("rho inverse law broken at {n}"))),
            Err(e) => b.record_error(&[], format!("index {n}: {e}")),
        }
    }
    for m in lo..=hi {
        for p in lo..=hi {
            for n in lo..=hi {
                let res = (|| {
                    let composed = tau(orbit, m, p)?.after(&tau(orbit, p, n)?);
                    let direct = tau(orbit, m, n)?;
                    let back = tau(orbit, n, m)?.after(&direct);
                    Ok::<_, crate::family::FamilyError>(composed == direct && back.is_identity())
                })();
                match res {
                    Ok(true) => b.record(&[], 0.0, None),
                    Ok(false) => b.record(&[], f64::INFINITY, Some(format!("tau law broken at ({m},{p},{n})"))),
                    Err(e) => b.record_error(&[], e.to_string()),
                }
            }
        }
    }
    b.finish()
}

fn run_checks(command: Command, cfg: &RunConfig, seed: u64, tol: f64) -> Result<Vec<CheckReport>, ConfigError> {
    let counts = &cfg.samples;
    let mut parts = Vec::new();
    match command {
        Command::CheckR => {
            let r = cfg.build_r()?;
            parts.push(check_unitarity(&r, &cfg.spec(counts.count, seed), tol));
            parts.push(check_ybe(&r, &cfg.spec(counts.triples, seed), tol));
        }
        Command::Orbit => {
            let orbit = cfg.build_orbit()?;
            let (params, errors) = member_params(&orbit);
            let mut members = orbit.check_members(&cfg.spec(counts.triples, seed), tol);
            for (k, v) in params {
                members.params.insert(k, [v.re, v.im]);
            }
            if !errors.is_empty() {
                let mut b = CheckReport::builder("orbit_generation", tol, seed);
                for e in errors {
                    b.record_error(&[], e);
                }
                parts.push(b.finish());
            }
            parts.push(members);
            parts.push(orbit_laws(&orbit, seed));
            parts.push(check_rho_admissible(orbit.rho(), orbit.base(), &cfg.spec(counts.triples, seed), tol));
        }
        Command::Currents => {
            let orbit = cfg.build_orbit()?;
            for n in [cfg.pair.0, cfg.pair.1] {
                let r = orbit.member(n).map_err(|e| cerr("/pair", e.to_string()))?;
                let mut rep = check_psi_compatibility(&r, &cfg.spec(counts.count, seed), tol);
                rep.check = format!("currents^({n})");
                match delta_normalization(&r) {
                    Ok(nv) => {
                        rep.params.insert("N".into(), [nv.re, nv.im]);
                        rep.notes.push(format!("N^({n}) convention: {N_CONVENTION}"));
                    }
                    Err(e) => rep.notes.push(format!("N^({n}) unavailable: {e}")),
                }
                parts.push(rep);
            }
        }
        Command::VerifyRll => {
            let orbit = cfg.build_orbit()?;
            let faults = Faults { invert_k1k2_ratio: cfg.inject_fault.as_deref() == Some("invert_k1k2_ratio") };
            let opts = VerifyOptions { faults, ..VerifyOptions::default() };
            let (i, j) = cfg.pair;
            parts.push(verify_components_with(&orbit, i, j, cfg.epsilon, &cfg.spec(counts.tag_pairs, seed), tol, &opts));
        }
        Command::VerifyEf => {
            let orbit = cfg.build_orbit()?;
            let (i, j) = cfg.pair;
            parts.push(verify_ef_relations(
                &orbit,
                i,
                j,
                cfg.epsilon,
                orbit.central_sum(i, j),
                &cfg.spec(counts.tag_pairs, seed),
                tol,
            ));
        }
        Command::Transfer => {
            let orbit = cfg.build_orbit()?;
            let (i, _) = cfg.pair;
            // degenerate chain: every site carries R^(i)
            let r = orbit.member(i).map_err(|e| cerr("/pair/0", e.to_string()))?;
            let mut chain: Vec<Arc<dyn LOperator>> = Vec::new();
            for k in 0..cfg.transfer_sites {
                let w = cfg.inhomogeneities.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
                chain.push(Arc::new(EvalL::new(r.clone(), w, i)));
            }
            let warning = trace_transfer(&chain, C64::new(0.5, 0.5)).ok().and_then(|t| t.warning);
            let mut rep = check_commuting(
                "transfer_commuting",
                |u| trace_transfer(&chain, u).map(|t| t.matrix),
                &cfg.spec(counts.tag_pairs, seed),
                tol,
            );
            rep.notes.extend(warning);
            parts.push(rep);
        }
    }
    Ok(parts)
}

/// Result of one command: the combined report and whether every check passed.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: CheckReport,
    pub checks: Vec<CheckReport>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }

    /// Report JSON without the timestamp; identical inputs give identical bytes.
    pub fn deterministic_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.report).expect("report serialization");
        let checks: Vec<Value> =
            self.checks.iter().map(|c| serde_json::to_value(c).expect("report serialization")).collect();
        v.as_object_mut().expect("object").insert("checks".into(), Value::Array(checks));
        v
    }

    pub fn to_json(&self, timestamp: u64) -> String {
        let mut v = self.deterministic_json();
        v.as_object_mut().expect("object").insert("timestamp".into(), json!(timestamp));
        serde_json::to_string_pretty(&v).expect("report serialization")
    }
}

pub fn run(command: Command, cfg: &RunConfig, seed: u64, tol: f64) -> Result<RunOutcome, ConfigError> {
    let mut checks = run_checks(command, cfg, seed, tol)?;
    checks.sort_by(|a, b| a.check.cmp(&b.check));
    let mut report = CheckReport::merge(command.name(), &checks);
    report.seed = seed;
    report.tolerance = tol;
    Ok(RunOutcome { report, checks })
}

pub fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, ConfigError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| cerr("", format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_json(&text)
        }
    }
}

/// Full command-line flow. Returns the process exit code: 0 when every check passes,
/// 1 when a check fails, 2 for configuration or I/O errors.
pub fn main_with(cli: Cli, env_seed: Option<String>) -> i32 {
    let outcome = (|| {
        let cfg = load_config(cli.opts.config.as_ref())?;
        let seed = resolve_seed(cli.opts.seed, cfg.seed, env_seed.as_deref())?;
        let tol = match cli.opts.tol {
            Some(t) if t > 0.0 && t.is_finite() => t,
            Some(_) => return Err(cerr("/tolerance", "--tol must be a positive finite number")),
            None => cfg.tolerance,
        };
        let out = run(cli.command, &cfg, seed, tol)?;
        let path = cli.opts.out.clone().or(cfg.output.clone().map(PathBuf::from));
        Ok((out, path))
    })();
    match outcome {
        Err(e) => {
            eprintln!("{e}");
            2
        }
        Ok((out, path)) => {
            let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            let text = out.to_json(ts);
            if let Some(p) = path {
                if let Err(e) = std::fs::write(&p, format!("{text}\n")) {
                    eprintln!("cannot write {}: {e}", p.display());
                    return 2;
                }
            }
            if !cli.opts.quiet {
                println!("{text}");
            }
            if out.passed() {
                0
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2), Some("3")).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2), Some("3")).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, Some("3")).unwrap(), 3);
        assert_eq!(resolve_seed(None, None, None).unwrap_err().pointer, "/seed");
        assert_eq!(resolve_seed(None, None, Some("x")).unwrap_err().pointer, "/seed");
    }

    #[test]
    fn pointers_name_bad_fields() {
        let e = RunConfig::from_json(r#"{"samples": {"count": -1}}"#).unwrap_err();
        assert_eq!(e.pointer, "/samples/count");
        let e = RunConfig::from_json(r#"{"r_matrix": {"builtin": "trig", "eta": [1, "x"], "hbar": 0.3}}"#).unwrap_err();
        assert_eq!(e.pointer, "/r_matrix/eta/1");
        let e = RunConfig::from_json(r#"{"epsilon": 2}"#).unwrap_err();
        assert_eq!(e.pointer, "/epsilon");
        let e = RunConfig::from_json(r#"{"bogus": 1}"#).unwrap_err();
        assert_eq!(e.pointer, "/bogus");
    }

    #[test]
    fn config_roundtrip_is_exact() {
        let mut cfg = RunConfig::default();
        cfg.seed = Some(u64::MAX - 3);
        cfg.central_charge = C64::new(0.1 + 0.2, -1.0 / 3.0);
        cfg.inhomogeneities = vec![C64::new(std::f64::consts::E, 1e-300)];
        let text = serde_json::to_string(&cfg.to_value()).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
