//! Identity suites over a weight: every check is a residual against a
//! tolerance, run in parallel and reported in a fixed order.

use crate::associated::{self, CasFamily, Op};
use crate::determinants::{self, master_window, recurrence_instances};
use crate::expweight::{self, Coef};
use crate::kernels;
use crate::oracle::{self, Oracle};
use crate::polynomials::{self, Systems};
use crate::recurrences::{self, Family};
use crate::{grid, Error, Kind, Result, Weight, C64, ONE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Largest degree the oracle suite integrates.
pub const ORACLE_N_MAX: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Dodgson,
    Duality,
    Biorth,
    Recur,
    Mixed,
    Kernels,
    Cd,
    Oracle,
    Assoc,
    Casorati,
    ClosedForms,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Dodgson,
        Suite::Duality,
        Suite::Biorth,
        Suite::Recur,
        Suite::Mixed,
        Suite::Kernels,
        Suite::Cd,
        Suite::Oracle,
        Suite::Assoc,
        Suite::Casorati,
        Suite::ClosedForms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dodgson => "dodgson",
            Suite::Duality => "duality",
            Suite::Biorth => "biorth",
            Suite::Recur => "recur",
            Suite::Mixed => "mixed",
            Suite::Kernels => "kernels",
            Suite::Cd => "cd",
            Suite::Oracle => "oracle",
            Suite::Assoc => "assoc",
            Suite::Casorati => "casorati",
            Suite::ClosedForms => "closed-forms",
        }
    }

    /// A suite name or `all`.
    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|x| x.name() == s).map(|x| vec![*x])
    }

    /// Suites that need the polynomial systems to exist at the configured offsets.
    fn needs_systems(self) -> bool {
        !matches!(self, Suite::Dodgson | Suite::Duality | Suite::ClosedForms)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub offsets_2jk: Vec<i64>,
    pub offsets_j2k: Vec<i64>,
    /// Offsets for the oracle suite. Its error is absolute on the scale of the
    /// integrand, so it wants the offsets where the determinants are largest.
    pub oracle_2jk: Vec<i64>,
    pub oracle_j2k: Vec<i64>,
    pub seed: u64,
    /// Replaces every upper-bound tolerance in the named suite.
    pub tolerances: BTreeMap<String, f64>,
    /// Trapezoid nodes for quadrature cross-checks.
    pub quad_points: usize,
}

impl VerifyConfig {
    /// Defaults for a weight. For e^ζ the determinants at negative offsets
    /// vanish, and E_n^(s) = D_n^(s−n+1), so the j−2k offsets sit above n_max.
    pub fn for_weight(w: &Weight, n_max: usize) -> Self {
        let (a, b, c, d) = match w {
            Weight::ExpLinear | Weight::ExpDeformed { .. } => {
                let m = ORACLE_N_MAX.min(n_max) as i64;
                (vec![2, 3, 4], (0..3).map(|k| n_max as i64 + 2 + k).collect(), vec![0, 1, 2], vec![m - 1, m, m + 1])
            }
            _ => (vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]),
        };
        VerifyConfig {
            n_max,
            offsets_2jk: a,
            offsets_j2k: b,
            oracle_2jk: c,
            oracle_j2k: d,
            seed: 0,
            tolerances: BTreeMap::new(),
            quad_points: 512,
        }
    }

    pub fn with_offsets(mut self, offsets: &[i64]) -> Self {
        self.offsets_2jk = offsets.to_vec();
        self.offsets_j2k = offsets.to_vec();
        self.oracle_2jk = offsets.to_vec();
        self.oracle_j2k = offsets.to_vec();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn offsets(&self, kind: Kind) -> &[i64] {
        match kind {
            Kind::TwoJK => &self.offsets_2jk,
            Kind::JTwoK => &self.offsets_j2k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
    Error,
}

/// Whether the residual must stay below the tolerance or (negative
/// controls) above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub n: usize,
    pub offset: i64,
    pub z_index: Option<usize>,
    pub residual: Option<f64>,
    pub tol: f64,
    pub bound: Bound,
    pub outcome: Outcome,
    pub note: Option<String>,
    #[serde(skip)]
    pub error: Option<Error>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// No system exists at any configured offset.
    Singular,
    /// An oracle ran out of budget or was asked for an unsupported point.
    OracleError,
    /// The suite does not apply to this weight.
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub status: Status,
    pub max_residual: f64,
    pub passed: usize,
    pub failed: usize,
    pub not_applicable: usize,
    pub errors: usize,
    pub message: Option<String>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub weight: String,
    pub config: VerifyConfig,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status == Status::Pass)
    }

    /// 0 all pass, 2 singular, 3 unsupported, 4 oracle error, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let has = |st: Status| self.suites.iter().any(|s| s.status == st);
        if self.passed() {
            0
        } else if has(Status::Singular) {
            2
        } else if has(Status::Unsupported) {
            3
        } else if has(Status::OracleError) {
            4
        } else {
            1
        }
    }
}

type Eval<'a> = Box<dyn Fn() -> Vec<(String, Result<f64>)> + Send + Sync + 'a>;

struct Job<'a> {
    n: usize,
    offset: i64,
    z_index: Option<usize>,
    tol: f64,
    bound: Bound,
    eval: Eval<'a>,
}

struct Jobs<'a> {
    list: Vec<Job<'a>>,
}

impl<'a> Jobs<'a> {
    fn one(&mut self, name: impl Into<String>, key: (usize, i64, Option<usize>), tol: f64, f: impl Fn() -> Result<f64> + Send + Sync + 'a) {
        let name = name.into();
        self.many(key, tol, move || vec![(name.clone(), f())]);
    }

    fn many(&mut self, key: (usize, i64, Option<usize>), tol: f64, f: impl Fn() -> Vec<(String, Result<f64>)> + Send + Sync + 'a) {
        self.list.push(Job { n: key.0, offset: key.1, z_index: key.2, tol, bound: Bound::AtMost, eval: Box::new(f) });
    }

    fn below(&mut self, name: impl Into<String>, key: (usize, i64, Option<usize>), tol: f64, f: impl Fn() -> Result<f64> + Send + Sync + 'a) {
        self.one(name, key, tol, f);
        self.list.last_mut().expect("just pushed").bound = Bound::AtLeast;
    }
}

fn named(v: Vec<recurrences::Named>) -> Vec<(String, Result<f64>)> {
    v.into_iter().map(|(k, r)| (k.to_string(), r)).collect()
}

fn is_oracle_error(e: &Error) -> bool {
    matches!(e, Error::CostLimitExceeded { .. } | Error::RegionTooCloseToCircle { .. })
}

fn not_applicable(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularDeterminant { .. }
            | Error::DegenerateCdPoint
            | Error::ZeroArgument
            | Error::AnnulusExcluded { .. }
            | Error::PrecisionLoss { .. }
    )
}

/// A residual over tolerance that rounding alone can produce is not judged.
fn limited(residual: f64, floor: f64, tol: f64) -> Result<f64> {
    if residual > tol && residual <= floor {
        Err(Error::PrecisionLoss { residual, floor })
    } else {
        Ok(residual)
    }
}

/// Relative gap between an oracle estimate and a library value.
fn against(est: oracle::Estimate, want: C64, tol: f64) -> Result<f64> {
    let scale = est.value.norm().max(want.norm());
    let r = grid::rel_diff(est.value, want);
    limited(r, 10.0 * est.floor / scale, tol)
}

/// Runs the suites in order.
pub fn run(sys: &Systems, suites: &[Suite], cfg: &VerifyConfig) -> Report {
    let suites = suites.iter().map(|&s| run_suite(sys, s, cfg)).collect();
    Report { weight: sys.weight().describe(), config: cfg.clone(), suites }
}

pub fn run_suite(sys: &Systems, suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let mut report = SuiteReport {
        suite,
        status: Status::Pass,
        max_residual: 0.0,
        passed: 0,
        failed: 0,
        not_applicable: 0,
        errors: 0,
        message: None,
        checks: Vec::new(),
    };
    if suite == Suite::ClosedForms && *sys.weight() != Weight::ExpLinear {
        report.status = Status::Unsupported;
        report.message = Some(format!("closed forms exist only for exp, not {}", sys.weight().describe()));
        return report;
    }
    let mut pre = Vec::new();
    let mut usable = Vec::new();
    let (n_need, offsets): (usize, [&[i64]; 2]) = if suite == Suite::Oracle {
        (cfg.n_max.min(ORACLE_N_MAX), [&cfg.oracle_2jk, &cfg.oracle_j2k])
    } else {
        (cfg.n_max, [&cfg.offsets_2jk, &cfg.offsets_j2k])
    };
    if suite.needs_systems() {
        for (kind, offs) in [Kind::TwoJK, Kind::JTwoK].into_iter().zip(offsets) {
            for &o in offs {
                match system_exists(sys, kind, o, n_need) {
                    Ok(()) => usable.push((kind, o)),
                    Err(e) => pre.push(Check {
                        suite,
                        name: format!("{kind} system"),
                        n: n_need,
                        offset: o,
                        z_index: None,
                        residual: None,
                        tol: 0.0,
                        bound: Bound::AtMost,
                        outcome: Outcome::NotApplicable,
                        note: Some(e.to_string()),
                        error: Some(e),
                    }),
                }
            }
        }
        if usable.is_empty() {
            report.status = Status::Singular;
            report.message = pre.iter().find_map(|c| c.note.clone());
            report.not_applicable = pre.len();
            report.checks = pre;
            return report;
        }
    } else {
        for kind in [Kind::TwoJK, Kind::JTwoK] {
            usable.extend(cfg.offsets(kind).iter().map(|&o| (kind, o)));
        }
    }
    let mut jobs = Jobs { list: Vec::new() };
    build_jobs(&mut jobs, sys, suite, cfg, &usable);
    let tol_override = cfg.tolerances.get(suite.name()).copied();
    let mut checks: Vec<Check> = jobs
        .list
        .par_iter()
        .flat_map_iter(|job| {
            let tol = match (job.bound, tol_override) {
                (Bound::AtMost, Some(t)) => t,
                _ => job.tol,
            };
            (job.eval)().into_iter().map(move |(name, r)| judge(suite, name, job, tol, r))
        })
        .collect();
    checks.sort_by_key(|c| (c.n, c.offset, c.z_index));
    checks.splice(0..0, pre);
    for c in &checks {
        match c.outcome {
            Outcome::Pass => report.passed += 1,
            Outcome::Fail => report.failed += 1,
            Outcome::NotApplicable => report.not_applicable += 1,
            Outcome::Error => report.errors += 1,
        }
        if c.bound == Bound::AtMost {
            if let Some(r) = c.residual {
                report.max_residual = report.max_residual.max(r);
            }
        }
    }
    if report.errors > 0 {
        let e = checks.iter().find_map(|c| c.error.clone().filter(|_| c.outcome == Outcome::Error));
        if e.as_ref().is_some_and(is_oracle_error) {
            report.status = Status::OracleError;
        } else {
            report.status = Status::Fail;
        }
        report.message = e.map(|e| e.to_string());
    } else if report.failed > 0 {
        report.status = Status::Fail;
    } else if report.passed == 0 {
        report.status = Status::Fail;
        report.message = Some("no applicable checks".into());
    }
    report.checks = checks;
    report
}

fn judge(suite: Suite, name: String, job: &Job, tol: f64, r: Result<f64>) -> Check {
    let mut c = Check {
        suite,
        name,
        n: job.n,
        offset: job.offset,
        z_index: job.z_index,
        residual: None,
        tol,
        bound: job.bound,
        outcome: Outcome::Pass,
        note: None,
        error: None,
    };
    match r {
        Ok(v) => {
            c.residual = Some(v);
            let ok = match job.bound {
                Bound::AtMost => v <= tol,
                Bound::AtLeast => v >= tol,
            };
            c.outcome = if ok { Outcome::Pass } else { Outcome::Fail };
        }
        Err(e) => {
            c.outcome = if not_applicable(&e) { Outcome::NotApplicable } else { Outcome::Error };
            c.note = Some(e.to_string());
            c.error = Some(e);
        }
    }
    c
}

/// Every polynomial and norm up to degree n_max exists at (kind, offset).
pub fn system_exists(sys: &Systems, kind: Kind, offset: i64, n_max: usize) -> Result<()> {
    let s = sys.system(kind, offset, n_max)?;
    for n in 0..=n_max {
        s.norm(n)?;
    }
    Ok(())
}

/// Points off the circle drawn from the seed; moduli in [0.4, 0.8] or [1.25, 2].
fn random_points(seed: u64, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = if rng.random_bool(0.5) { rng.random_range(0.4..0.8) } else { rng.random_range(1.25..2.0) };
            C64::from_polar(m, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

fn offsets_of<'u>(usable: &'u [(Kind, i64)], kind: Kind) -> impl Iterator<Item = i64> + 'u {
    usable.iter().filter(move |(k, _)| *k == kind).map(|(_, o)| *o)
}

fn build_jobs<'a>(jobs: &mut Jobs<'a>, sys: &'a Systems, suite: Suite, cfg: &VerifyConfig, usable: &[(Kind, i64)]) {
    let nm = cfg.n_max;
    let grid9 = grid::with_origin();
    let grid8 = grid::off_circle();
    match suite {
        Suite::Dodgson => {
            let pts = random_points(cfg.seed, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
            for &(kind, o) in usable {
                for n in 1..=nm.min(4) {
                    for (zi, w) in pts.chunks(2).enumerate() {
                        let (z, zeta) = (w[0], w[1]);
                        jobs.many((n, o, Some(zi)), 1e-10, move || {
                            let (lo, hi) = master_window(kind, o, n as i64);
                            let table = match sys.moments(lo, hi) {
                                Ok(t) => t,
                                Err(e) => return vec![("moments".into(), Err(e))],
                            };
                            recurrence_instances(n)
                                .into_iter()
                                .filter(|i| i.kind == kind)
                                .map(|i| (i.name.clone(), i.residual(o, n as i64, z, zeta, &table)))
                                .collect()
                        });
                    }
                    let size = n + 3;
                    for q in 0..8 {
                        let mut pick = |_| {
                            let a = rng.random_range(0..size - 1);
                            (a, rng.random_range(a + 1..size))
                        };
                        let (rows, cols) = (pick(0), pick(1));
                        let (z, zeta) = (pts[q % 4], pts[(q + 1) % 4]);
                        jobs.one(format!("{kind}: rows {rows:?} cols {cols:?}"), (n, o, Some(q)), 1e-10, move || {
                            let (lo, hi) = master_window(kind, o, n as i64);
                            let table = sys.moments(lo, hi)?;
                            determinants::dodgson_residual(kind, o, n as i64, z, zeta, rows, cols, &table)
                        });
                    }
                }
            }
        }
        Suite::Duality => {
            for r in offsets_of(usable, Kind::TwoJK) {
                for n in 0..=nm {
                    jobs.one("D_n(r) = E_n(r+n-1)", (n, r, None), 1e-12, move || {
                        let (a, b) = determinants::required_window(Kind::TwoJK, r, n);
                        let (c, d) = determinants::required_window(Kind::JTwoK, r + n as i64 - 1, n);
                        let table = sys.moments(a.min(c), b.max(d))?;
                        determinants::duality_check(r, n, &table)
                    });
                }
            }
            for s in offsets_of(usable, Kind::JTwoK) {
                for n in 0..=nm {
                    jobs.one("S_n(s) vs P_n(s-n+1)", (n, s, None), 1e-10, move || polynomials::duality_s_p(sys, n, s));
                    jobs.one("R_n(s) vs Q_n(s-n-2)", (n, s, None), 1e-10, move || polynomials::duality_r_q(sys, n, s));
                }
            }
        }
        Suite::Biorth => {
            for &(kind, o) in usable {
                jobs.one(format!("{kind} pairing"), (nm, o, None), 1e-10, move || sys.system(kind, o, nm)?.biorthogonality_residual(nm));
                jobs.one(format!("{kind} LDU"), (nm, o, None), 1e-10, move || Ok(sys.system(kind, o, nm)?.ldu(nm)?.residual()));
                for n in 0..=nm {
                    jobs.one(format!("{kind} tails"), (n, o, None), 1e-10, move || Ok(polynomials::tails(sys, kind, n, o)?.residual()));
                }
            }
        }
        Suite::Recur => {
            for &(kind, o) in usable {
                let fams: [Family; 2] = match kind {
                    Kind::TwoJK => [Family::P, Family::QStar],
                    Kind::JTwoK => [Family::R, Family::SStar],
                };
                for n in 0..nm {
                    for (zi, &z) in grid9.iter().enumerate() {
                        for fam in fams {
                            jobs.one(format!("{fam} degree"), (n, o, Some(zi)), 1e-9, move || recurrences::degree_residual(sys, fam, n, o, z));
                            jobs.one(format!("{fam} offset"), (n, o, Some(zi)), 1e-9, move || recurrences::offset_residual(sys, fam, n, o, z));
                        }
                    }
                }
                for n in 0..=nm {
                    jobs.one(format!("{kind} tail product"), (n, o, None), 1e-9, move || recurrences::tail_product_residual(sys, kind, n, o));
                    jobs.one(format!("{kind} det from tails"), (n, o, None), 1e-9, move || {
                        Ok(grid::rel_diff(recurrences::reconstruct_det_from_tails(sys, kind, n, o)?, sys.det(kind, n, o)?))
                    });
                    jobs.many((n, o, None), 1e-9, move || {
                        let res = match kind {
                            Kind::TwoJK => recurrences::interrelation_residuals_2jk(sys, n, o),
                            Kind::JTwoK => recurrences::interrelation_residuals_j2k(sys, n, o),
                        };
                        match res {
                            Ok(v) => v.iter().enumerate().map(|(i, r)| (format!("{kind} interrelation {i}"), Ok(*r))).collect(),
                            Err(e) => vec![(format!("{kind} interrelations"), Err(e))],
                        }
                    });
                }
                if kind == Kind::TwoJK {
                    for n in 0..nm {
                        jobs.many((n, o, None), 1e-9, move || named(recurrences::offset_tail_residuals(sys, n, o)));
                    }
                }
            }
            for (r, s) in paired(usable) {
                for n in 0..nm {
                    for (zi, &z) in grid9.iter().enumerate() {
                        jobs.many((n, r, Some(zi)), 1e-9, move || named(recurrences::first_order_residuals(sys, n, r, s, z)));
                    }
                }
            }
        }
        Suite::Mixed => {
            for (r, s) in paired(usable) {
                for n in 0..nm {
                    for (zi, &z) in grid9.iter().enumerate() {
                        jobs.many((n, r, Some(zi)), 1e-9, move || named(recurrences::mixed_residuals(sys, n, r, s, z)));
                    }
                }
            }
        }
        Suite::Kernels => {
            for &(kind, o) in usable {
                for n in 0..nm {
                    jobs.one(format!("{kind} normalization"), (n, o, None), 1e-10, move || {
                        let v = kernels::normalization(sys, kind, n, o)?;
                        let want = C64::new(n as f64 + 1.0, 0.0);
                        Ok((v - want).norm() / want.norm())
                    });
                    for zi in 0..4 {
                        let (x, y) = (grid8[zi], grid8[zi + 4]);
                        for ell in 0..=n + 1 {
                            jobs.many((n, o, Some(zi)), 1e-9, move || match kernels::reproducing_residuals(sys, kind, n, o, ell, x, y) {
                                Ok([a, b]) => vec![(format!("{kind} reproduce second, degree {ell}"), Ok(a)), (format!("{kind} reproduce first, degree {ell}"), Ok(b))],
                                Err(e) => vec![(format!("{kind} reproduce, degree {ell}"), Err(e))],
                            });
                        }
                        jobs.one(format!("{kind} projection"), (n, o, Some(zi)), 1e-9, move || kernels::projection_residual(sys, kind, n, o, x, y));
                        if kind == Kind::JTwoK {
                            jobs.one("L_n vs K_n at reciprocal points", (n, o, Some(zi)), 1e-9, move || kernels::cross_residual(sys, n, o, x, y));
                        }
                    }
                }
            }
        }
        Suite::Cd => {
            for &(kind, o) in usable {
                for n in 0..nm {
                    for zi in 0..8 {
                        let (x, y) = (grid8[zi], grid8[(zi + 3) % 8]);
                        jobs.one(format!("{kind} sum/master/cd"), (n, o, Some(zi)), 1e-9, move || kernels::method_agreement(sys, kind, n, o, x, y));
                        match kind {
                            Kind::TwoJK => jobs.one("Q_n from P_n, P_n+1", (n, o, Some(zi)), 1e-9, move || recurrences::bilinear_q_from_p(sys, n, o, x)),
                            Kind::JTwoK => jobs.one("R_n from S_n, S_n+1", (n, o, Some(zi)), 1e-9, move || recurrences::bilinear_r_from_s(sys, n, o, x)),
                        }
                    }
                }
            }
        }
        Suite::Oracle => oracle_jobs(jobs, sys, cfg, usable),
        Suite::Assoc => {
            let points = cfg.quad_points;
            for &(kind, o) in usable {
                for (zi, &z) in grid9.iter().enumerate() {
                    for r in [o, o + 1] {
                        jobs.one(format!("F2 series vs quadrature, offset {r}"), (0, o, Some(zi)), 1e-10, move || {
                            Ok((associated::f2(sys, r, z)? - associated::f2_quadrature(sys.weight(), r, z, points)).norm()
                                / associated::f2(sys, r, z)?.norm().max(1.0))
                        });
                    }
                }
                let ops: [Op; 2] = match kind {
                    Kind::TwoJK => [Op::L1, Op::L2],
                    Kind::JTwoK => [Op::L3, Op::L4],
                };
                for op in ops {
                    for n in 1..=nm.min(4) {
                        for (zi, &z) in grid8.iter().enumerate() {
                            jobs.many((n, o, Some(zi)), 1e-9, move || {
                                associated::solutions(sys, op, o, z)
                                    .iter()
                                    .map(|(name, f)| (format!("{op} {name}"), associated::op_residual(sys, op, f.as_ref(), n, o, z)))
                                    .collect()
                            });
                            jobs.below(format!("{op} on a constant sequence"), (n, o, Some(zi)), 1e-3, move || {
                                associated::op_residual(sys, op, &|_| Ok(ONE), n, o, z)
                            });
                        }
                    }
                }
            }
        }
        Suite::Casorati => {
            for &(kind, o) in usable {
                let fams: [CasFamily; 2] = match kind {
                    Kind::TwoJK => [CasFamily::P, CasFamily::Q],
                    Kind::JTwoK => [CasFamily::R, CasFamily::S],
                };
                for fam in fams {
                    for (zi, &z) in grid8.iter().enumerate() {
                        jobs.one(format!("{fam} Casoratian at n=0"), (0, o, Some(zi)), 1e-8, move || associated::casoratian_zero_residual(sys, fam, o, z));
                        for n in 1..nm.min(4) {
                            jobs.one(format!("{fam} transfer step"), (n, o, Some(zi)), 1e-9, move || associated::first_order_casorati_step(sys, fam, n, o, z));
                        }
                        for n in 2..=nm.min(4) {
                            jobs.one(format!("{fam} Abel ratio from degree 1"), (n, o, Some(zi)), 1e-8, move || {
                                let (r, floor) = associated::casoratian_ratio_bounded(sys, fam, 1, n, o, z)?;
                                limited(r, floor, 1e-8)
                            });
                        }
                    }
                }
            }
        }
        Suite::ClosedForms => closed_form_jobs(jobs, sys, cfg),
    }
}

/// Offsets r (2j−k) and s (j−2k) combined position by position.
fn paired(usable: &[(Kind, i64)]) -> Vec<(i64, i64)> {
    offsets_of(usable, Kind::TwoJK).zip(offsets_of(usable, Kind::JTwoK)).collect()
}

fn oracle_jobs<'a>(jobs: &mut Jobs<'a>, sys: &'a Systems, cfg: &VerifyConfig, usable: &[(Kind, i64)]) {
    let nm = cfg.n_max.min(ORACLE_N_MAX);
    let pts = random_points(cfg.seed.wrapping_add(1), 4);
    let points = cfg.quad_points;
    let orc = match Oracle::new(sys.weight()) {
        Ok(o) => std::sync::Arc::new(o),
        Err(e) => {
            jobs.one("oracle weight", (0, 0, None), 0.0, move || Err(e.clone()));
            return;
        }
    };
    for &(kind, o) in usable {
        let fams: [Family; 2] = match kind {
            Kind::TwoJK => [Family::P, Family::QStar],
            Kind::JTwoK => [Family::R, Family::SStar],
        };
        for n in 0..=nm {
            let a = orc.clone();
            jobs.one(format!("{kind} determinant"), (n, o, None), 1e-10, move || against(a.det_est(kind, n, o)?, sys.det(kind, n, o)?, 1e-10));
        }
        for n in 0..=nm.min(2) {
            for (zi, &z) in pts.iter().enumerate().take(2) {
                for fam in fams {
                    let a = orc.clone();
                    jobs.one(format!("{fam} polynomial"), (n, o, Some(zi)), 1e-8, move || {
                        let want = match fam {
                            Family::P => sys.ep(n, o, z)?,
                            Family::QStar => sys.eq(n, o, z)?,
                            Family::R => sys.er(n, o, z)?,
                            Family::SStar => sys.es(n, o, z)?,
                        };
                        against(a.poly_est(fam, n, o, z)?, want, 1e-8)
                    });
                }
                let a = orc.clone();
                let w = pts[(zi + 2) % 4];
                jobs.one(format!("{kind} kernel"), (n, o, Some(zi)), 1e-8, move || {
                    against(a.kernel_est(kind, n, o, z, w)?, kernels::kernel_sum(sys, kind, n, o, w, z)?, 1e-8)
                });
            }
        }
        for n in 0..=nm.min(1) {
            for (zi, &z) in [C64::from_polar(0.5, 0.7), C64::from_polar(1.8, 2.1)].iter().enumerate() {
                for fam in fams {
                    let a = orc.clone();
                    let which = match fam {
                        Family::P => associated::Hat::P,
                        Family::QStar => associated::Hat::Q,
                        Family::R => associated::Hat::R,
                        Family::SStar => associated::Hat::S,
                    };
                    jobs.one(format!("{fam} associated function"), (n, o, Some(zi)), 1e-8, move || {
                        against(a.assoc_est(fam, n, o, z)?, associated::hat(sys, which, n, o, z)?, 1e-8)
                    });
                }
            }
        }
        if kind == Kind::TwoJK {
            for n in 0..=nm {
                let a = orc.clone();
                let z = pts[n % 4];
                jobs.one("2j-k to j-2k transfer", (n, o, None), 1e-10, move || a.transfer_check(n, o, z));
            }
        }
        for n in 1..=nm.min(2) {
            let fixed = [pts[n % 4] / pts[n % 4].norm()];
            jobs.one(format!("{kind} kernel determinant integration"), (n, o, None), 1e-8, move || {
                oracle::gaudin_residual(sys, kind, n, o, &fixed, points)
            });
        }
    }
    for m in 2..=4 {
        let zs = random_points(cfg.seed.wrapping_add(m as u64), m);
        jobs.one("Vandermonde density identity", (m, 0, None), 1e-12, move || Ok(oracle::density_identity_residual(&zs)));
    }
}

fn closed_form_jobs<'a>(jobs: &mut Jobs<'a>, sys: &'a Systems, cfg: &VerifyConfig) {
    let nm = cfg.n_max;
    let grid9 = grid::with_origin();
    for r in 0u32..=4 {
        let ri = r as i64;
        for n in 0..=nm {
            jobs.one("determinant", (n, ri, None), 1e-10, move || Ok(grid::rel_diff(sys.d(n, ri)?, C64::new(expweight::det_closed(n, r), 0.0))));
            jobs.one("norm", (n, ri, None), 1e-10, move || Ok(grid::rel_diff(sys.h(n, ri)?, C64::new(expweight::norm_closed(n, r), 0.0))));
            for c in Coef::ALL {
                jobs.one(format!("{c}"), (n, ri, None), 1e-10, move || {
                    let v = match c {
                        Coef::Delta => recurrences::delta(sys, n, ri)?,
                        Coef::Eta => recurrences::eta(sys, n, ri)?,
                        Coef::Beta => recurrences::beta(sys, n, ri)?,
                        Coef::Alpha => recurrences::alpha(sys, n, ri)?,
                    };
                    let want = C64::new(expweight::reccoeff_closed(c, n, r), 0.0);
                    Ok((v - want).norm() / want.norm().max(1.0))
                });
            }
            jobs.one("Q coefficients", (n, ri, None), 1e-10, move || {
                let q = sys.q(n, ri)?;
                Ok((0..=n).map(|l| grid::rel_diff(q.coeff(l), C64::new(expweight::q_coeff_closed(n, l, r), 0.0))).fold(0.0, f64::max))
            });
            jobs.one("P coefficients", (n, ri, None), 1e-10, move || {
                let p = sys.p(n, ri)?;
                Ok((0..=n).map(|l| grid::rel_diff(p.coeff(l), C64::new(expweight::p_coeff_closed(n, l, ri), 0.0))).fold(0.0, f64::max))
            });
            jobs.one("P coefficients, difference form", (n, ri, None), 1e-10, move || {
                Ok((0..=n)
                    .map(|l| grid::rel_diff(C64::new(expweight::p_coeff_nabla(n, l, ri), 0.0), C64::new(expweight::p_coeff_closed(n, l, ri), 0.0)))
                    .fold(0.0, f64::max))
            });
            for (zi, &z) in grid9.iter().enumerate() {
                jobs.one("Q hypergeometric value", (n, ri, Some(zi)), 1e-10, move || Ok(grid::rel_diff(sys.eq(n, ri, z)?, expweight::q_closed(n, r, z))));
            }
        }
        for (zi, &z) in grid9.iter().enumerate() {
            jobs.one("F2", (0, ri, Some(zi)), 1e-12, move || Ok(grid::rel_diff(associated::f2(sys, ri, z)?, expweight::f2_closed(r, z)?)));
            for n in 0..nm.saturating_sub(2) {
                jobs.one("P degree recurrence, closed coefficients", (n, ri, Some(zi)), 1e-9, move || {
                    let v = (0..4).map(|k| sys.ep(n + k, ri, z)).collect::<Result<Vec<_>>>()?;
                    Ok(grid::residual(&expweight::p_degree_terms(&|m| v[m - n], n, r, z)))
                });
                jobs.one("Q* degree recurrence, closed coefficients", (n, ri, Some(zi)), 1e-9, move || {
                    let v = (0..4).map(|k| sys.eqs(n + k, ri, z)).collect::<Result<Vec<_>>>()?;
                    Ok(grid::residual(&expweight::qstar_degree_terms(&|m| v[m - n], n, r, z)))
                });
            }
            for n in 0..=nm {
                jobs.one("P offset recurrence, closed coefficients", (n, ri, Some(zi)), 1e-9, move || {
                    let v = (0..4).map(|k| sys.ep(n, ri + k, z)).collect::<Result<Vec<_>>>()?;
                    Ok(grid::residual(&expweight::p_offset_terms(&|k| v[k as usize], n, r, z)))
                });
                jobs.one("Q* offset recurrence, closed coefficients", (n, ri, Some(zi)), 1e-9, move || {
                    let v = (0..4).map(|k| sys.eqs(n, ri + k, z)).collect::<Result<Vec<_>>>()?;
                    Ok(grid::residual(&expweight::qstar_offset_terms(&|k| v[k as usize], n, r, z)))
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::FourierSeries;

    fn random() -> Systems {
        Systems::new(Weight::FourierSeries(FourierSeries::random(7, -12, 16, 0.8)))
    }

    #[test]
    fn parse_suites() {
        assert_eq!(Suite::parse("all").unwrap().len(), 11);
        assert_eq!(Suite::parse("closed-forms"), Some(vec![Suite::ClosedForms]));
        assert!(Suite::parse("nope").is_none());
    }

    #[test]
    fn constant_weight_is_singular() {
        let sys = Systems::new(Weight::FourierSeries(FourierSeries::from_pairs(&[(0, ONE)])));
        let cfg = VerifyConfig::for_weight(sys.weight(), 4);
        let rep = run(&sys, &[Suite::Biorth], &cfg);
        assert_eq!(rep.suites[0].status, Status::Singular);
        assert_eq!(rep.exit_code(), 2);
        assert!(rep.suites[0].message.as_deref().unwrap().contains("size 2"));
    }

    #[test]
    fn random_weight_suites() {
        let sys = random();
        let cfg = VerifyConfig::for_weight(sys.weight(), 3).with_seed(7);
        for s in [Suite::Dodgson, Suite::Duality, Suite::Biorth, Suite::Mixed, Suite::Casorati] {
            let r = run_suite(&sys, s, &cfg);
            let bad: Vec<_> = r.checks.iter().filter(|c| c.outcome == Outcome::Fail || c.outcome == Outcome::Error).take(3).collect();
            assert_eq!(r.status, Status::Pass, "{s}: {bad:?}");
        }
    }

    #[test]
    fn closed_forms_need_exp() {
        let sys = random();
        let rep = run(&sys, &[Suite::ClosedForms], &VerifyConfig::for_weight(sys.weight(), 2));
        assert_eq!(rep.exit_code(), 3);
    }

    #[test]
    fn order_is_deterministic() {
        let sys = random();
        let cfg = VerifyConfig::for_weight(sys.weight(), 2);
        let a = run_suite(&sys, Suite::Recur, &cfg);
        let b = run_suite(&sys, Suite::Recur, &cfg);
        assert_eq!(a, b);
    }
}
