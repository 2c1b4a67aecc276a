use crate::config::RunConfig;
use crate::report::{Report, Residual, Row};
use biocirc::associated::{self, Hat};
use biocirc::determinants::{self, required_window};
use biocirc::kernels::{self, Method};
use biocirc::recurrences;
use biocirc::verify::{self, Suite, VerifyConfig};
use biocirc::weights::trapezoid_moment;
use biocirc::{grid, Error, Kind, Systems, Weight, C64};

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError { code: 3, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match e {
            Error::SingularDeterminant { .. } => 2,
            Error::CostLimitExceeded { .. }
            | Error::RegionTooCloseToCircle { .. }
            | Error::AnnulusExcluded { .. }
            | Error::QuadratureBandExceeded { .. }
            | Error::SeriesNotConverged { .. } => 4,
            Error::InvalidWeight(_)
            | Error::InvalidMinor(_)
            | Error::ZeroArgument
            | Error::DegenerateCdPoint
            | Error::KindMismatch { .. } => 3,
            Error::MomentWindowTooSmall { .. } | Error::PrecisionLoss { .. } => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

pub type CmdResult = Result<Report, CliError>;

pub struct Ctx {
    pub cfg: RunConfig,
    pub sys: Systems,
    pub kind: Kind,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Result<Ctx, CliError> {
        let weight = Weight::from_spec(&cfg.weight)?;
        let kind = cfg.kind.into();
        Ok(Ctx { sys: Systems::new(weight), kind, cfg })
    }

    fn report(&self) -> Report {
        Report::new(self.cfg.clone())
    }

    fn zs(&self) -> Vec<C64> {
        if self.cfg.z.is_empty() {
            grid::off_circle()
        } else {
            self.cfg.z.clone()
        }
    }

    fn tag(&self, a: &str, b: &str) -> String {
        match self.kind {
            Kind::TwoJK => a.to_string(),
            Kind::JTwoK => b.to_string(),
        }
    }
}

pub fn moments(ctx: &Ctx, lo: Option<i64>, hi: Option<i64>) -> CmdResult {
    let (a, b) = required_window(ctx.kind, ctx.cfg.offset, ctx.cfg.n);
    let (lo, hi) = (lo.unwrap_or(a.min(ctx.cfg.offset)), hi.unwrap_or(b.max(ctx.cfg.offset)));
    if lo > hi {
        return Err(CliError::config(format!("empty moment range {lo}..{hi}")));
    }
    let table = ctx.sys.moments(lo, hi)?;
    let mut rep = ctx.report();
    for k in lo..=hi {
        rep.rows.push(Row::value("w", None, ctx.cfg.offset, Some(k), table.get(k)?));
    }
    Ok(rep)
}

pub fn det(ctx: &Ctx) -> CmdResult {
    let (o, n) = (ctx.cfg.offset, ctx.cfg.n);
    let s = ctx.sys.system(ctx.kind, o, n.saturating_sub(1))?;
    let mut rep = ctx.report();
    let name = ctx.tag("D", "E");
    for k in 0..=n {
        let mut row = Row::value(name.clone(), Some(k), o, None, s.det(k)?);
        if s.is_singular(k)? {
            row.note = Some("singular".into());
        }
        rep.rows.push(row);
        let dual = match ctx.kind {
            Kind::TwoJK => ctx.sys.det(Kind::JTwoK, k, o + k as i64 - 1),
            Kind::JTwoK => ctx.sys.det(Kind::TwoJK, k, o - k as i64 + 1),
        };
        rep.residuals.push(Residual::new("duality", Some(k), dual.map(|d| grid::rel_diff(s.det(k).unwrap_or(d), d))));
    }
    rep.value = Some(s.det(n)?);
    Ok(rep)
}

pub fn poly(ctx: &Ctx) -> CmdResult {
    let (o, n) = (ctx.cfg.offset, ctx.cfg.n);
    let s = ctx.sys.system(ctx.kind, o, n)?;
    let mut rep = ctx.report();
    let (f, g, h) = match ctx.kind {
        Kind::TwoJK => ("P", "Q", "h"),
        Kind::JTwoK => ("R", "S", "g"),
    };
    let zs = ctx.zs();
    for k in 0..=n {
        let (p, q) = (s.first(k)?, s.second(k)?);
        for (name, poly) in [(f, p), (g, q)] {
            for (l, c) in poly.coeffs.iter().enumerate() {
                rep.rows.push(Row::value(name, Some(k), o, Some(l as i64), *c));
            }
        }
        rep.rows.push(Row::value(h, Some(k), o, None, s.norm(k)?));
        for (zi, &z) in zs.iter().enumerate() {
            rep.rows.push(Row::value(format!("{f}(z)"), Some(k), o, Some(zi as i64), p.eval(z)));
            rep.rows.push(Row::value(format!("{g}(z)"), Some(k), o, Some(zi as i64), q.eval(z)));
        }
    }
    rep.residuals.push(Residual::new("biorthogonality", Some(n), s.biorthogonality_residual(n)));
    rep.residuals.push(Residual::new("ldu", Some(n), s.ldu(n).map(|l| l.residual())));
    Ok(rep)
}

pub fn recur(ctx: &Ctx) -> CmdResult {
    let (o, n) = (ctx.cfg.offset, ctx.cfg.n);
    let sys = &ctx.sys;
    let mut rep = ctx.report();
    type Coef = fn(&Systems, usize, i64) -> biocirc::Result<C64>;
    let coefs: [(&str, Coef); 4] = match ctx.kind {
        Kind::TwoJK => [
            ("delta", recurrences::delta),
            ("eta", recurrences::eta),
            ("beta", recurrences::beta),
            ("alpha", recurrences::alpha),
        ],
        Kind::JTwoK => [
            ("kappa", recurrences::kappa),
            ("rho", recurrences::rho),
            ("gamma", recurrences::gamma),
            ("theta", recurrences::theta),
        ],
    };
    for k in 0..=n {
        for (name, f) in coefs {
            rep.rows.push(Row::from_result(name, Some(k), o, None, f(sys, k, o)));
        }
        let inter = match ctx.kind {
            Kind::TwoJK => recurrences::interrelation_residuals_2jk(sys, k, o),
            Kind::JTwoK => recurrences::interrelation_residuals_j2k(sys, k, o),
        };
        rep.residuals.push(Residual::new("interrelations", Some(k), inter.map(|v| v.into_iter().fold(0.0, f64::max))));
        let fams = match ctx.kind {
            Kind::TwoJK => [recurrences::Family::P, recurrences::Family::QStar],
            Kind::JTwoK => [recurrences::Family::R, recurrences::Family::SStar],
        };
        for fam in fams {
            let worst = |f: fn(&Systems, recurrences::Family, usize, i64, C64) -> biocirc::Result<f64>| {
                let mut m = 0.0f64;
                for z in ctx.zs() {
                    m = m.max(f(sys, fam, k, o, z)?);
                }
                Ok(m)
            };
            rep.residuals.push(Residual::new(format!("{fam} degree recurrence"), Some(k), worst(recurrences::degree_residual)));
            rep.residuals.push(Residual::new(format!("{fam} offset recurrence"), Some(k), worst(recurrences::offset_residual)));
        }
    }
    Ok(rep)
}

pub fn kernel(ctx: &Ctx, x: C64, y: C64, method: Option<Method>) -> CmdResult {
    let (o, n) = (ctx.cfg.offset, ctx.cfg.n);
    let mut rep = ctx.report();
    let name = ctx.tag("K", "L");
    let methods = match method {
        Some(m) => vec![m],
        None => vec![Method::Sum, Method::MasterDet, Method::Cd],
    };
    for k in 0..=n {
        for &m in &methods {
            let v = kernels::kernel(&ctx.sys, m, ctx.kind, k, o, x, y).map(|e| e.value);
            if method.is_some() {
                if let Err(e @ Error::SingularDeterminant { .. }) = v {
                    return Err(e.into());
                }
            }
            rep.rows.push(Row::from_result(format!("{name}[{m}]"), Some(k), o, None, v));
        }
        rep.residuals.push(Residual::new("method agreement", Some(k), kernels::method_agreement(&ctx.sys, ctx.kind, k, o, x, y)));
    }
    rep.value = rep.rows.iter().rev().find_map(|r| r.value);
    Ok(rep)
}

pub fn assoc(ctx: &Ctx, which: &[Hat]) -> CmdResult {
    let (o, n) = (ctx.cfg.offset, ctx.cfg.n);
    let mut rep = ctx.report();
    let zs = ctx.zs();
    let points = ctx.cfg.points.unwrap_or(512);
    for (zi, &z) in zs.iter().enumerate() {
        let zi = Some(zi as i64);
        let f2 = associated::f2(&ctx.sys, o, z)?;
        rep.rows.push(Row::value("F1", None, o, zi, associated::f1(&ctx.sys, o, z)?));
        rep.rows.push(Row::value("F2", None, o, zi, f2));
        let q = associated::f2_quadrature(ctx.sys.weight(), o, z, points);
        rep.residuals.push(Residual::new(format!("F2 vs quadrature at z[{}]", zi.unwrap_or(0)), None, Ok((f2 - q).norm() / f2.norm().max(1.0))));
        for k in 0..=n {
            for &h in which {
                rep.rows.push(Row::value(format!("{h}hat"), Some(k), o, zi, associated::hat(&ctx.sys, h, k, o, z)?));
                if Hat::PRIMARY.contains(&h) {
                    rep.rows.push(Row::value(format!("{h}check"), Some(k), o, zi, associated::check(&ctx.sys, h, k, o, z)?));
                }
            }
        }
    }
    Ok(rep)
}

pub fn tau(ctx: &Ctx, u: C64, ell: i64) -> CmdResult {
    let n = ctx.cfg.n;
    let mut rep = ctx.report();
    for k in 0..=n {
        rep.rows.push(Row::value("tau", Some(k), ell, None, determinants::tau(k, ell, u)?));
    }
    rep.value = Some(determinants::tau(n, ell, u)?);
    let points = ctx.cfg.points.unwrap_or(256);
    let w = |z: C64| (z + u * z.powi(-2)).exp();
    let q = trapezoid_moment(&w, ell, points);
    let g = determinants::tau(1, ell, u)?;
    rep.residuals.push(Residual::new("tau_1 vs contour quadrature", Some(1), Ok((g - q).norm() / g.norm().max(1.0))));
    if u == C64::new(0.0, 0.0) {
        let sys = Systems::new(Weight::ExpLinear);
        for k in 0..=n {
            let r = sys.det(Kind::TwoJK, k, ell).and_then(|d| Ok(grid::rel_diff(determinants::tau(k, ell, u)?, d)));
            rep.residuals.push(Residual::new("tau vs exp determinant", Some(k), r));
        }
    }
    Ok(rep)
}

pub struct VerifyArgs {
    pub suites: Vec<Suite>,
    pub n_max: usize,
    pub offsets: Option<Vec<i64>>,
}

pub fn verify(ctx: &Ctx, args: &VerifyArgs) -> Result<(Report, i32), CliError> {
    let mut vc = VerifyConfig::for_weight(ctx.sys.weight(), args.n_max).with_seed(ctx.cfg.seed);
    if let Some(o) = &args.offsets {
        vc = vc.with_offsets(o);
    }
    vc.tolerances = ctx.cfg.tolerances.clone();
    if let Some(p) = ctx.cfg.points {
        vc.quad_points = p;
    }
    let v = verify::run(&ctx.sys, &args.suites, &vc);
    let code = v.exit_code();
    let mut rep = ctx.report();
    rep.verify = Some(v);
    Ok((rep, code))
}
