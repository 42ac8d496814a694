//! Run configuration: a flat key-value text format with one section per
//! task, plus command-line overrides.
//!
//! A configuration file looks like
//!
//! ```text
//! # global keys apply to every task that does not override them
//! algebra   = sl2
//! level     = 2
//! precision = 50
//!
//! [voa-check]
//! depth = 4
//!
//! [fuse]
//! weights = 1 ; 1
//!
//! [connect]
//! weights = 1; 1; 1; 1
//! samples = 0.4 0.5 0.6
//! ```
//!
//! Sections may repeat; tasks run in file order.  Values resolve with the
//! precedence *task key > command-line flag > global key > built-in
//! default*.  Every violation is reported as [`Error::Config`] with a
//! field-level label and the offending line number, before any computation
//! starts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::kz::SingularPoint;
use crate::liealg::RootSystem;
use crate::rat::{qi, qr, Q};
use crate::{Error, Result};

/// Default working precision in decimal digits.
pub const DEFAULT_PRECISION: usize = 50;
/// Default series truncation order.
pub const DEFAULT_SERIES_ORDER: usize = 40;
/// Default module truncation depth.
pub const DEFAULT_DEPTH: usize = 4;
/// Default output directory.
pub const DEFAULT_OUT_DIR: &str = "out";
/// Default number of randomized states for the vertex-identity checks.
pub const DEFAULT_STATES: usize = 20;
/// Default seed for the randomized vertex-identity checks.
pub const DEFAULT_SEED: u64 = 20_260_817;

/// Values supplied on the command line; they sit between per-task keys and
/// global config keys in the resolution order.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub precision: Option<usize>,
    pub series_order: Option<usize>,
    pub depth: Option<usize>,
    pub out: Option<PathBuf>,
    pub parallel: bool,
}

/// A fully resolved and validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub parallel: bool,
    pub tasks: Vec<Task>,
}

/// One validated task, in file order.
#[derive(Debug, Clone)]
pub enum Task {
    Fuse(FuseTask),
    Blocks(BlocksTask),
    Connect(ConnectTask),
    Monodromy(MonodromyTask),
    VerifyAssoc(AssocTask),
    VerifyNPoint(NPointTask),
    VoaCheck(VoaCheckTask),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Fuse(_) => "fuse",
            Task::Blocks(_) => "blocks",
            Task::Connect(_) => "connect",
            Task::Monodromy(_) => "monodromy",
            Task::VerifyAssoc(_) => "verify-assoc",
            Task::VerifyNPoint(_) => "verify-npoint",
            Task::VoaCheck(_) => "voa-check",
        }
    }
}

/// Fusion-rule computation for two highest weights.
#[derive(Debug, Clone)]
pub struct FuseTask {
    pub algebra: usize,
    pub level: i64,
    pub weights: [Vec<i64>; 2],
}

/// Local series solutions of a four-point system at one singular point.
#[derive(Debug, Clone)]
pub struct BlocksTask {
    pub algebra: usize,
    pub level: i64,
    pub weights: [Vec<i64>; 4],
    pub point: SingularPoint,
    pub order: usize,
}

/// Connection matrix between the expansions at 0 and 1, with overlap
/// residuals at sample points.
#[derive(Debug, Clone)]
pub struct ConnectTask {
    pub algebra: usize,
    pub level: i64,
    pub weights: [Vec<i64>; 4],
    pub order: usize,
    pub precision: usize,
    pub samples: Vec<Q>,
    pub tolerance: Q,
}

/// Monodromy representation checks: loop relations, eigenphases, braiding.
#[derive(Debug, Clone)]
pub struct MonodromyTask {
    pub algebra: usize,
    pub level: i64,
    pub weights: [Vec<i64>; 4],
    pub order: usize,
    pub precision: usize,
    pub tolerance: Q,
    pub triple_tolerance: Q,
}

/// Agreement of the two iterated-product expansions inside their common
/// region of convergence.
#[derive(Debug, Clone)]
pub struct AssocTask {
    pub algebra: usize,
    pub level: i64,
    pub weights: [Vec<i64>; 4],
    pub order: usize,
    pub precision: usize,
    pub z1: Q,
    pub z2: Q,
    pub tolerance: Q,
}

/// Convergence of a multi-insertion product at nested evaluation points.
#[derive(Debug, Clone)]
pub struct NPointTask {
    pub algebra: usize,
    pub level: i64,
    pub weights: Vec<Vec<i64>>,
    pub order: usize,
    pub window: usize,
    pub points: Vec<Q>,
    pub ratio_bound: Q,
    pub drift_tolerance: Q,
}

/// Virasoro relations, central charge, graded dimensions, and randomized
/// vertex-identity checks on a truncated vacuum module.
#[derive(Debug, Clone)]
pub struct VoaCheckTask {
    pub algebra: usize,
    pub level: i64,
    pub depth: usize,
    pub states: usize,
    pub seed: u64,
}

/// Reads and validates a configuration file.
pub fn load(path: &Path, over: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_str(&text, over)
}

/// Parses and validates configuration text.  See the module documentation
/// for the format.
pub fn parse_str(text: &str, over: &Overrides) -> Result<RunConfig> {
    check_overrides(over)?;
    let raw = split_sections(text)?;
    let globals = parse_globals(&raw.globals)?;
    let mut tasks = Vec::new();
    for (idx, section) in raw.sections.iter().enumerate() {
        let scope = Scope {
            label: format!("{}[{}]", section.name, idx + 1),
            entries: &section.entries,
            globals: &globals,
            over,
        };
        tasks.push(match section.name.as_str() {
            "fuse" => Task::Fuse(scope.fuse()?),
            "blocks" => Task::Blocks(scope.blocks()?),
            "connect" => Task::Connect(scope.connect()?),
            "monodromy" => Task::Monodromy(scope.monodromy()?),
            "verify-assoc" => Task::VerifyAssoc(scope.verify_assoc()?),
            "verify-npoint" => Task::VerifyNPoint(scope.verify_npoint()?),
            "voa-check" => Task::VoaCheck(scope.voa_check()?),
            other => {
                return Err(Error::Config {
                    field: format!("{}[{}]", other, idx + 1),
                    message: format!(
                        "line {}: unknown task '{}' (expected fuse | blocks | connect | \
                         monodromy | verify-assoc | verify-npoint | voa-check)",
                        section.line, other
                    ),
                })
            }
        });
    }
    let out_dir = over
        .out
        .clone()
        .or_else(|| globals.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok(RunConfig {
        out_dir,
        parallel: over.parallel,
        tasks,
    })
}

fn check_overrides(over: &Overrides) -> Result<()> {
    for (name, v) in [
        ("precision", over.precision),
        ("series-order", over.series_order),
        ("depth", over.depth),
    ] {
        if v == Some(0) {
            return Err(Error::Config {
                field: name.into(),
                message: "command-line value must be at least 1".into(),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Raw line structure.

struct RawSection {
    name: String,
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

struct RawConfig {
    globals: BTreeMap<String, (String, usize)>,
    sections: Vec<RawSection>,
}

fn split_sections(text: &str) -> Result<RawConfig> {
    let mut globals = BTreeMap::new();
    let mut sections: Vec<RawSection> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Config {
                field: "syntax".into(),
                message: format!("line {}: unterminated section header '{}'", lineno, line),
            })?;
            sections.push(RawSection {
                name: name.trim().to_string(),
                line: lineno,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            field: "syntax".into(),
            message: format!("line {}: expected 'key = value' or '[task]'", lineno),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config {
                field: "syntax".into(),
                message: format!("line {}: empty key", lineno),
            });
        }
        let scope = match sections.last_mut() {
            Some(s) => &mut s.entries,
            None => &mut globals,
        };
        if let Some((_, prev)) = scope.get(&key) {
            return Err(Error::Config {
                field: key.clone(),
                message: format!(
                    "line {}: duplicate key (already set on line {})",
                    lineno, prev
                ),
            });
        }
        scope.insert(key, (value, lineno));
    }
    Ok(RawConfig { globals, sections })
}

// ---------------------------------------------------------------------------
// Typed globals.

struct Globals {
    algebra: Option<usize>,
    level: Option<i64>,
    precision: Option<usize>,
    series_order: Option<usize>,
    depth: Option<usize>,
    out: Option<String>,
}

fn parse_globals(entries: &BTreeMap<String, (String, usize)>) -> Result<Globals> {
    let mut g = Globals {
        algebra: None,
        level: None,
        precision: None,
        series_order: None,
        depth: None,
        out: None,
    };
    for (key, (value, line)) in entries {
        let err = |msg: String| Error::Config {
            field: key.clone(),
            message: format!("line {}: {}", line, msg),
        };
        match key.as_str() {
            "algebra" => g.algebra = Some(parse_algebra(value).map_err(err)?),
            "level" => g.level = Some(parse_level(value).map_err(err)?),
            "precision" => g.precision = Some(parse_positive(value).map_err(err)?),
            "series-order" => g.series_order = Some(parse_positive(value).map_err(err)?),
            "depth" => g.depth = Some(parse_positive(value).map_err(err)?),
            "out" => g.out = Some(value.clone()),
            other => {
                return Err(Error::Config {
                    field: other.to_string(),
                    message: format!("line {}: unknown global key", line),
                })
            }
        }
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Scalar parsers (shared by globals and task scopes).

fn parse_algebra(s: &str) -> std::result::Result<usize, String> {
    let body = s
        .strip_prefix("sl")
        .ok_or_else(|| format!("unsupported algebra '{}' (expected sl<N>, e.g. sl2)", s))?;
    let body = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .unwrap_or(body);
    let n: usize = body
        .trim()
        .parse()
        .map_err(|_| format!("unsupported algebra '{}' (expected sl<N>, e.g. sl2)", s))?;
    if n < 2 {
        return Err(format!("sl({}) is not a simple algebra", n));
    }
    Ok(n)
}

fn parse_level(s: &str) -> std::result::Result<i64, String> {
    let k: i64 = s
        .parse()
        .map_err(|_| format!("level '{}' is not an integer", s))?;
    if k < 1 {
        return Err(format!("level {} is not a positive integer", k));
    }
    Ok(k)
}

fn parse_positive(s: &str) -> std::result::Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("'{}' is not a non-negative integer", s))?;
    if v == 0 {
        return Err("value must be at least 1".into());
    }
    Ok(v)
}

/// Parses a rational number written as `p/q`, an integer, a decimal, or a
/// decimal with exponent (`2.5e-3`).  All forms are exact.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (mant, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let n: BigInt = if digits.is_empty() {
        return None;
    } else {
        digits.parse().ok()?
    };
    let mut q = Q::from_integer(n);
    let shift = exp10 as i64 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if shift >= 0 {
        q *= Q::from_integer(ten.pow(shift as u32));
    } else {
        q /= Q::from_integer(ten.pow((-shift) as u32));
    }
    if neg {
        q = -q;
    }
    Some(q)
}

// ---------------------------------------------------------------------------
// Task resolution.

struct Scope<'a> {
    label: String,
    entries: &'a BTreeMap<String, (String, usize)>,
    globals: &'a Globals,
    over: &'a Overrides,
}

impl Scope<'_> {
    fn err(&self, key: &str, line: Option<usize>, msg: String) -> Error {
        Error::Config {
            field: format!("{}.{}", self.label, key),
            message: match line {
                Some(l) => format!("line {}: {}", l, msg),
                None => msg,
            },
        }
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    /// Rejects keys outside the allowed set for this task.
    fn allow(&self, keys: &[&str]) -> Result<()> {
        for (key, (_, line)) in self.entries {
            if !keys.contains(&key.as_str()) {
                return Err(self.err(
                    key,
                    Some(*line),
                    format!("unknown key (allowed: {})", keys.join(", ")),
                ));
            }
        }
        Ok(())
    }

    fn algebra(&self) -> Result<usize> {
        match self.raw("algebra") {
            Some((v, line)) => parse_algebra(v).map_err(|m| self.err("algebra", Some(line), m)),
            None => self.globals.algebra.ok_or_else(|| {
                self.err(
                    "algebra",
                    None,
                    "missing (set it in this section or as a global key)".into(),
                )
            }),
        }
    }

    fn level(&self) -> Result<i64> {
        match self.raw("level") {
            Some((v, line)) => parse_level(v).map_err(|m| self.err("level", Some(line), m)),
            None => self.globals.level.ok_or_else(|| {
                self.err(
                    "level",
                    None,
                    "missing (set it in this section or as a global key)".into(),
                )
            }),
        }
    }

    fn order(&self) -> Result<usize> {
        match self.raw("order") {
            Some((v, line)) => parse_positive(v).map_err(|m| self.err("order", Some(line), m)),
            None => Ok(self
                .over
                .series_order
                .or(self.globals.series_order)
                .unwrap_or(DEFAULT_SERIES_ORDER)),
        }
    }

    fn precision(&self) -> Result<usize> {
        match self.raw("precision") {
            Some((v, line)) => {
                parse_positive(v).map_err(|m| self.err("precision", Some(line), m))
            }
            None => Ok(self
                .over
                .precision
                .or(self.globals.precision)
                .unwrap_or(DEFAULT_PRECISION)),
        }
    }

    fn depth(&self) -> Result<usize> {
        match self.raw("depth") {
            Some((v, line)) => parse_positive(v).map_err(|m| self.err("depth", Some(line), m)),
            None => Ok(self
                .over
                .depth
                .or(self.globals.depth)
                .unwrap_or(DEFAULT_DEPTH)),
        }
    }

    fn positive_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            Some((v, line)) => parse_positive(v).map_err(|m| self.err(key, Some(line), m)),
            None => Ok(default),
        }
    }

    fn rational(&self, key: &str, default: Q) -> Result<Q> {
        match self.raw(key) {
            Some((v, line)) => parse_rational(v)
                .ok_or_else(|| self.err(key, Some(line), format!("'{}' is not a rational", v))),
            None => Ok(default),
        }
    }

    fn positive_rational(&self, key: &str, default: Q) -> Result<Q> {
        let q = self.rational(key, default)?;
        if q <= Q::zero() {
            let line = self.raw(key).map(|(_, l)| l);
            return Err(self.err(key, line, format!("{} is not positive", q)));
        }
        Ok(q)
    }

    fn rational_list(&self, key: &str) -> Result<Option<Vec<Q>>> {
        let Some((v, line)) = self.raw(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for tok in v.split_whitespace() {
            out.push(parse_rational(tok).ok_or_else(|| {
                self.err(key, Some(line), format!("'{}' is not a rational", tok))
            })?);
        }
        if out.is_empty() {
            return Err(self.err(key, Some(line), "empty list".into()));
        }
        Ok(Some(out))
    }

    /// Parses the weight lists and checks shape, dominance, and
    /// admissibility at the given level.
    fn weights(&self, rs: &RootSystem, level: i64, expected: Option<usize>) -> Result<Vec<Vec<i64>>> {
        let (v, line) = self
            .raw("weights")
            .ok_or_else(|| self.err("weights", None, "missing".into()))?;
        let rank = rs.rank();
        let mut out: Vec<Vec<i64>> = Vec::new();
        if v.contains(';') {
            for chunk in v.split(';') {
                let mut w = Vec::new();
                for tok in chunk.split_whitespace() {
                    w.push(tok.parse::<i64>().map_err(|_| {
                        self.err(
                            "weights",
                            Some(line),
                            format!("'{}' is not an integer label", tok),
                        )
                    })?);
                }
                out.push(w);
            }
        } else {
            if rank > 1 {
                return Err(self.err(
                    "weights",
                    Some(line),
                    format!(
                        "rank-{} weight lists must be separated by ';' \
                         (e.g. weights = 1 0; 0 1)",
                        rank
                    ),
                ));
            }
            for tok in v.split_whitespace() {
                out.push(vec![tok.parse::<i64>().map_err(|_| {
                    self.err(
                        "weights",
                        Some(line),
                        format!("'{}' is not an integer label", tok),
                    )
                })?]);
            }
        }
        if let Some(n) = expected {
            if out.len() != n {
                return Err(self.err(
                    "weights",
                    Some(line),
                    format!("expected {} weight lists, got {}", n, out.len()),
                ));
            }
        }
        for w in &out {
            if w.len() != rank {
                return Err(self.err(
                    "weights",
                    Some(line),
                    format!("weight {:?} has {} labels, the rank is {}", w, w.len(), rank),
                ));
            }
            if !rs.is_dominant(w) {
                return Err(self.err(
                    "weights",
                    Some(line),
                    format!("weight {:?} is not dominant integral", w),
                ));
            }
            let pairing = rs.level_pairing(w);
            if pairing > qi(level) {
                return Err(self.err(
                    "weights",
                    Some(line),
                    format!(
                        "weight {:?} is not admissible at level {}: pairing {} exceeds the level",
                        w, level, pairing
                    ),
                ));
            }
        }
        Ok(out)
    }

    fn algebra_level_system(&self) -> Result<(usize, i64, RootSystem)> {
        let n = self.algebra()?;
        let level = self.level()?;
        let rs = RootSystem::type_a(n - 1)?;
        Ok((n, level, rs))
    }

    // -- one resolver per task ------------------------------------------

    fn fuse(&self) -> Result<FuseTask> {
        self.allow(&["algebra", "level", "weights"])?;
        let (n, level, rs) = self.algebra_level_system()?;
        if n != 2 {
            return Err(self.err(
                "algebra",
                None,
                "fusion rules are implemented for sl2 only".into(),
            ));
        }
        let w = self.weights(&rs, level, Some(2))?;
        Ok(FuseTask {
            algebra: n,
            level,
            weights: [w[0].clone(), w[1].clone()],
        })
    }

    fn blocks(&self) -> Result<BlocksTask> {
        self.allow(&["algebra", "level", "weights", "point", "order"])?;
        let (n, level, rs) = self.algebra_level_system()?;
        let w = self.weights(&rs, level, Some(4))?;
        let point = match self.raw("point") {
            None => SingularPoint::Zero,
            Some(("zero", _)) => SingularPoint::Zero,
            Some(("one", _)) => SingularPoint::One,
            Some((other, line)) => {
                return Err(self.err(
                    "point",
                    Some(line),
                    format!("'{}' is not a singular point (expected zero | one)", other),
                ))
            }
        };
        Ok(BlocksTask {
            algebra: n,
            level,
            weights: [w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()],
            point,
            order: self.order()?,
        })
    }

    fn connect(&self) -> Result<ConnectTask> {
        self.allow(&[
            "algebra",
            "level",
            "weights",
            "order",
            "precision",
            "samples",
            "tolerance",
        ])?;
        let (n, level, rs) = self.algebra_level_system()?;
        let w = self.weights(&rs, level, Some(4))?;
        let samples = self
            .rational_list("samples")?
            .unwrap_or_else(|| vec![qr(2, 5), qr(1, 2), qr(3, 5)]);
        for s in &samples {
            if !(s > &Q::zero() && s < &Q::one()) {
                let line = self.raw("samples").map(|(_, l)| l);
                return Err(self.err(
                    "samples",
                    line,
                    format!("sample point {} is not strictly between 0 and 1", s),
                ));
            }
        }
        Ok(ConnectTask {
            algebra: n,
            level,
            weights: [w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()],
            order: self.order()?,
            precision: self.precision()?,
            samples,
            tolerance: self.positive_rational("tolerance", qr(1, 100_000_000))?,
        })
    }

    fn monodromy(&self) -> Result<MonodromyTask> {
        self.allow(&[
            "algebra",
            "level",
            "weights",
            "order",
            "precision",
            "tolerance",
            "triple-tolerance",
        ])?;
        let (n, level, rs) = self.algebra_level_system()?;
        let w = self.weights(&rs, level, Some(4))?;
        Ok(MonodromyTask {
            algebra: n,
            level,
            weights: [w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()],
            order: self.order()?,
            precision: self.precision()?,
            tolerance: self.positive_rational("tolerance", qr(1, 10_000_000_000))?,
            triple_tolerance: self.positive_rational("triple-tolerance", qr(1, 100_000_000))?,
        })
    }

    fn verify_assoc(&self) -> Result<AssocTask> {
        self.allow(&[
            "algebra",
            "level",
            "weights",
            "order",
            "precision",
            "z1",
            "z2",
            "tolerance",
        ])?;
        let (n, level, rs) = self.algebra_level_system()?;
        let w = self.weights(&rs, level, Some(4))?;
        let z1 = match self.raw("z1") {
            Some((v, line)) => parse_rational(v)
                .ok_or_else(|| self.err("z1", Some(line), format!("'{}' is not a rational", v)))?,
            None => return Err(self.err("z1", None, "missing".into())),
        };
        let z2 = match self.raw("z2") {
            Some((v, line)) => parse_rational(v)
                .ok_or_else(|| self.err("z2", Some(line), format!("'{}' is not a rational", v)))?,
            None => return Err(self.err("z2", None, "missing".into())),
        };
        let diff = &z1 - &z2;
        if !(z2 > Q::zero() && z1 > z2 && z2 > diff) {
            return Err(self.err(
                "z1",
                None,
                format!(
                    "insertion points ({}, {}) violate the required ordering \
                     z1 > z2 > z1 - z2 > 0",
                    z1, z2
                ),
            ));
        }
        Ok(AssocTask {
            algebra: n,
            level,
            weights: [w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()],
            order: self.order()?,
            precision: self.precision()?,
            z1,
            z2,
            tolerance: self.positive_rational("tolerance", qr(1, 100_000_000))?,
        })
    }

    fn verify_npoint(&self) -> Result<NPointTask> {
        self.allow(&[
            "algebra",
            "level",
            "weights",
            "order",
            "window",
            "points",
            "ratio-bound",
            "drift-tolerance",
        ])?;
        let (n, level, rs) = self.algebra_level_system()?;
        let weights = self.weights(&rs, level, None)?;
        if weights.len() < 3 {
            let line = self.raw("weights").map(|(_, l)| l);
            return Err(self.err(
                "weights",
                line,
                format!(
                    "a product needs at least 3 weight lists \
                     (output, insertions, bottom), got {}",
                    weights.len()
                ),
            ));
        }
        let points = self
            .rational_list("points")?
            .ok_or_else(|| self.err("points", None, "missing".into()))?;
        let pline = self.raw("points").map(|(_, l)| l);
        if points.len() != weights.len() - 2 {
            return Err(self.err(
                "points",
                pline,
                format!(
                    "expected {} insertion points for {} weight lists, got {}",
                    weights.len() - 2,
                    weights.len(),
                    points.len()
                ),
            ));
        }
        for p in &points {
            if p <= &Q::zero() {
                return Err(self.err(
                    "points",
                    pline,
                    format!("insertion point {} is not positive", p),
                ));
            }
        }
        for pair in points.windows(2) {
            if pair[0] <= pair[1] {
                return Err(self.err(
                    "points",
                    pline,
                    format!(
                        "insertion points must decrease strictly, got {} before {}",
                        pair[0], pair[1]
                    ),
                ));
            }
        }
        let window = self.positive_or("window", 8)?;
        if window < 2 {
            let line = self.raw("window").map(|(_, l)| l);
            return Err(self.err(
                "window",
                line,
                "the tail window needs at least 2 shells".into(),
            ));
        }
        Ok(NPointTask {
            algebra: n,
            level,
            weights,
            order: self.order()?,
            window,
            points,
            ratio_bound: self.positive_rational("ratio-bound", Q::one())?,
            drift_tolerance: self.positive_rational("drift-tolerance", qr(1, 100_000_000))?,
        })
    }

    fn voa_check(&self) -> Result<VoaCheckTask> {
        self.allow(&["algebra", "level", "depth", "states", "seed"])?;
        let (n, level, _) = self.algebra_level_system()?;
        let depth = self.depth()?;
        if depth < 2 {
            let line = self.raw("depth").map(|(_, l)| l);
            return Err(self.err(
                "depth",
                line,
                "the Virasoro checks need truncation depth at least 2".into(),
            ));
        }
        let seed = match self.raw("seed") {
            Some((v, line)) => v.parse::<u64>().map_err(|_| {
                self.err(
                    "seed",
                    Some(line),
                    format!("'{}' is not an unsigned integer", v),
                )
            })?,
            None => DEFAULT_SEED,
        };
        Ok(VoaCheckTask {
            algebra: n,
            level,
            depth,
            states: self.positive_or("states", DEFAULT_STATES)?,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<RunConfig> {
        parse_str(text, &Overrides::default())
    }

    #[test]
    fn rationals_parse_in_every_written_form() {
        let cases = [
            ("3", qi(3)),
            ("-3", qi(-3)),
            ("+3", qi(3)),
            ("1/2", qr(1, 2)),
            ("-7/4", qr(-7, 4)),
            (" 9 / 12 ", qr(3, 4)),
            ("0.25", qr(1, 4)),
            ("-0.5", qr(-1, 2)),
            (".5", qr(1, 2)),
            ("2.", qi(2)),
            ("2.5e-3", qr(1, 400)),
            ("1e8", qi(100_000_000)),
            ("1E-2", qr(1, 100)),
            ("0.4", qr(2, 5)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_rational(text), Some(want), "{}", text);
        }
        for junk in ["", "x", "1/0", "1.2.3", "2e", "--3", "1 2", "0x3", "."] {
            assert_eq!(parse_rational(junk), None, "{:?}", junk);
        }
    }

    #[test]
    fn a_full_config_resolves_every_task_kind() {
        let text = "
            # everything at once
            algebra   = sl2
            level     = 2
            precision = 60
            out       = artifacts

            [fuse]
            weights = 1 ; 1

            [blocks]
            weights = 1; 1; 1; 1
            point   = one
            order   = 12

            [connect]
            weights = 1; 1; 1; 1
            samples = 0.4 0.5 0.6
            tolerance = 1e-8

            [monodromy]
            weights = 1; 1; 1; 1

            [verify-assoc]
            weights = 1; 1; 1; 1
            z1 = 1
            z2 = 3/5

            [verify-npoint]
            level   = 1
            weights = 1; 1; 1; 1; 0
            points  = 1 0.5 0.2

            [voa-check]
            level = 1
            depth = 4
        ";
        let rc = cfg(text).unwrap();
        assert_eq!(rc.out_dir, PathBuf::from("artifacts"));
        assert_eq!(rc.tasks.len(), 7);
        let names: Vec<_> = rc.tasks.iter().map(|t| t.name()).collect();
        assert_eq!(
            names,
            [
                "fuse",
                "blocks",
                "connect",
                "monodromy",
                "verify-assoc",
                "verify-npoint",
                "voa-check"
            ]
        );
        match &rc.tasks[1] {
            Task::Blocks(b) => {
                assert_eq!(b.point, SingularPoint::One);
                assert_eq!(b.order, 12);
                assert_eq!(b.weights, [vec![1], vec![1], vec![1], vec![1]]);
            }
            other => panic!("expected blocks, got {:?}", other.name()),
        }
        match &rc.tasks[2] {
            Task::Connect(c) => {
                assert_eq!(c.precision, 60);
                assert_eq!(c.samples, vec![qr(2, 5), qr(1, 2), qr(3, 5)]);
                assert_eq!(c.tolerance, qr(1, 100_000_000));
            }
            other => panic!("expected connect, got {:?}", other.name()),
        }
        match &rc.tasks[5] {
            Task::VerifyNPoint(t) => {
                assert_eq!(t.level, 1);
                assert_eq!(t.points, vec![qi(1), qr(1, 2), qr(1, 5)]);
                assert_eq!(t.window, 8);
                assert_eq!(t.ratio_bound, Q::one());
            }
            other => panic!("expected verify-npoint, got {:?}", other.name()),
        }
        match &rc.tasks[6] {
            Task::VoaCheck(t) => {
                assert_eq!(t.states, DEFAULT_STATES);
                assert_eq!(t.seed, DEFAULT_SEED);
            }
            other => panic!("expected voa-check, got {:?}", other.name()),
        }
    }

    #[test]
    fn precedence_is_task_then_flag_then_global_then_default() {
        let text = "
            algebra = sl2
            level = 1
            series-order = 30

            [blocks]
            weights = 1; 1; 1; 1

            [blocks]
            weights = 1; 1; 1; 1
            order = 7
        ";
        let over = Overrides {
            series_order: Some(25),
            ..Default::default()
        };
        let rc = parse_str(text, &over).unwrap();
        match (&rc.tasks[0], &rc.tasks[1]) {
            (Task::Blocks(a), Task::Blocks(b)) => {
                assert_eq!(a.order, 25, "flag beats global");
                assert_eq!(b.order, 7, "task key beats flag");
            }
            _ => panic!("expected two blocks tasks"),
        }
        let rc = cfg(text).unwrap();
        match &rc.tasks[0] {
            Task::Blocks(a) => assert_eq!(a.order, 30, "global beats default"),
            _ => panic!(),
        }
        let rc = cfg("algebra = sl2\nlevel = 1\n[blocks]\nweights = 1; 1; 1; 1\n").unwrap();
        match &rc.tasks[0] {
            Task::Blocks(a) => assert_eq!(a.order, DEFAULT_SERIES_ORDER),
            _ => panic!(),
        }
    }

    #[test]
    fn empty_config_has_no_tasks() {
        let rc = cfg("").unwrap();
        assert!(rc.tasks.is_empty());
        assert_eq!(rc.out_dir, PathBuf::from(DEFAULT_OUT_DIR));
        let rc = cfg("# only a comment\nprecision = 50\n").unwrap();
        assert!(rc.tasks.is_empty());
    }

    #[test]
    fn sl3_weights_need_semicolons_and_get_checked() {
        let ok = cfg("algebra = sl3\nlevel = 2\n[blocks]\nweights = 1 0; 0 1; 1 0; 0 1\n");
        assert!(ok.is_ok(), "{:?}", ok.err());
        let missing = cfg("algebra = sl3\nlevel = 2\n[blocks]\nweights = 1 0 0 1\n");
        assert!(matches!(missing, Err(Error::Config { field, .. }) if field.contains("weights")));
        let short = cfg("algebra = sl3\nlevel = 2\n[blocks]\nweights = 1; 1; 1; 1\n");
        assert!(matches!(short, Err(Error::Config { field, .. }) if field.contains("weights")));
    }

    #[test]
    fn violations_come_back_with_field_labels() {
        let cases: Vec<(&str, &str)> = vec![
            ("[mystery]\n", "mystery[1]"),
            ("algebra = su2\n", "algebra"),
            ("level = 0\n[fuse]\nalgebra = sl2\nweights = 0; 0\n", "level"),
            ("bogus = 1\n", "bogus"),
            (
                "algebra = sl2\nlevel = 1\n[fuse]\nweights = 1; 1\nknob = 2\n",
                "fuse[1].knob",
            ),
            ("algebra = sl2\nlevel = 1\n[fuse]\n", "fuse[1].weights"),
            (
                "algebra = sl2\nlevel = 1\n[fuse]\nweights = 2; 0\n",
                "fuse[1].weights",
            ),
            (
                "algebra = sl2\nlevel = 1\n[fuse]\nweights = -1; 0\n",
                "fuse[1].weights",
            ),
            (
                "algebra = sl3\nlevel = 1\n[fuse]\nweights = 1 0; 0 1\n",
                "fuse[1].algebra",
            ),
            (
                "algebra = sl2\nlevel = 1\n[blocks]\nweights = 1; 1; 1\n",
                "blocks[1].weights",
            ),
            (
                "algebra = sl2\nlevel = 1\n[blocks]\nweights = 1; 1; 1; 1\npoint = two\n",
                "blocks[1].point",
            ),
            (
                "algebra = sl2\nlevel = 1\n[connect]\nweights = 1; 1; 1; 1\nsamples = 0 0.5\n",
                "connect[1].samples",
            ),
            (
                "algebra = sl2\nlevel = 1\n[connect]\nweights = 1; 1; 1; 1\ntolerance = -1e-8\n",
                "connect[1].tolerance",
            ),
            (
                "algebra = sl2\nlevel = 1\n[verify-assoc]\nweights = 1; 1; 1; 1\n\
                 z1 = 1\nz2 = 2/5\n",
                "verify-assoc[1].z1",
            ),
            (
                "algebra = sl2\nlevel = 1\n[verify-assoc]\nweights = 1; 1; 1; 1\nz1 = 1\n",
                "verify-assoc[1].z2",
            ),
            (
                "algebra = sl2\nlevel = 1\n[verify-npoint]\nweights = 1; 1; 1; 1; 0\n\
                 points = 1 0.5\n",
                "verify-npoint[1].points",
            ),
            (
                "algebra = sl2\nlevel = 1\n[verify-npoint]\nweights = 1; 1; 1; 1; 0\n\
                 points = 1 0.5 0.5\n",
                "verify-npoint[1].points",
            ),
            (
                "algebra = sl2\nlevel = 1\n[verify-npoint]\nweights = 1; 1; 1; 1; 0\n\
                 points = 1 0.5 0\n",
                "verify-npoint[1].points",
            ),
            (
                "algebra = sl2\nlevel = 1\n[voa-check]\ndepth = 1\n",
                "voa-check[1].depth",
            ),
            (
                "algebra = sl2\nlevel = 1\n[voa-check]\nseed = -1\n",
                "voa-check[1].seed",
            ),
            ("precision = 0\n", "precision"),
            ("level = 1\n[fuse]\nweights = 1; 1\n", "fuse[1].algebra"),
            ("algebra = sl2\n[fuse]\nweights = 1; 1\n", "fuse[1].level"),
        ];
        for (text, want_field) in cases {
            match cfg(text) {
                Err(Error::Config { field, .. }) => {
                    assert_eq!(field, want_field, "config text: {:?}", text)
                }
                other => panic!(
                    "expected a config error with field {:?} for {:?}, got {:?}",
                    want_field, text, other
                ),
            }
        }
    }

    #[test]
    fn syntax_errors_point_at_the_line() {
        for (text, needle) in [
            ("key-without-value\n", "line 1"),
            ("[unterminated\n", "line 1"),
            ("a = 1\na = 2\n", "line 2"),
            ("= 5\n", "line 1"),
        ] {
            match cfg(text) {
                Err(Error::Config { message, .. }) => {
                    assert!(message.contains(needle), "{}: {}", text, message)
                }
                other => panic!("expected config error for {:?}, got {:?}", text, other),
            }
        }
    }

    #[test]
    fn command_line_values_are_validated_too() {
        let over = Overrides {
            depth: Some(0),
            ..Default::default()
        };
        assert!(matches!(
            parse_str("", &over),
            Err(Error::Config { field, .. }) if field == "depth"
        ));
    }
}
