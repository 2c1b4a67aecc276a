//! Weights on the unit circle and their Fourier moments
//! w_k = ∮ ζ^{-k} w(ζ) dζ/(2πiζ).

use crate::special::{hyp_pfq, inv_factorial};
use crate::{Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Relative stopping threshold and term cap for the deformed moment series.
pub const DEFORMED_REL_TOL: f64 = 1e-18;
pub const DEFORMED_MAX_TERMS: usize = 200;

/// Finitely many Fourier modes; everything outside `band` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub coeffs: BTreeMap<i64, C64>,
    pub band: (i64, i64),
}

impl FourierSeries {
    pub fn new(coeffs: BTreeMap<i64, C64>) -> Self {
        let lo = coeffs.keys().next().copied().unwrap_or(0);
        let hi = coeffs.keys().next_back().copied().unwrap_or(0);
        FourierSeries { coeffs, band: (lo, hi) }
    }

    pub fn from_pairs(pairs: &[(i64, C64)]) -> Self {
        FourierSeries::new(pairs.iter().copied().collect())
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k < self.band.0 || k > self.band.1 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn eval(&self, zeta: C64) -> C64 {
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * zeta.powi(k as i32))
            .sum()
    }

    /// Parses `{"coeffs": {"<k>": [re, im], ...}, "band": [lo, hi]?}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            coeffs: BTreeMap<String, [f64; 2]>,
            band: Option<[i64; 2]>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::InvalidWeight(e.to_string()))?;
        let mut coeffs = BTreeMap::new();
        for (k, [re, im]) in raw.coeffs {
            let k: i64 = k
                .trim()
                .parse()
                .map_err(|_| Error::InvalidWeight(format!("bad mode index {k:?}")))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidWeight(format!("non-finite coefficient at {k}")));
            }
            coeffs.insert(k, C64::new(re, im));
        }
        let mut fs = FourierSeries::new(coeffs);
        if let Some([lo, hi]) = raw.band {
            if lo > hi {
                return Err(Error::InvalidWeight("band lower end exceeds upper end".into()));
            }
            fs.band = (lo, hi);
        }
        Ok(fs)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Raw {
            coeffs: BTreeMap<String, [f64; 2]>,
            band: [i64; 2],
        }
        let raw = Raw {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (k.to_string(), [c.re, c.im]))
                .collect(),
            band: [self.band.0, self.band.1],
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    /// Random band-limited weight with modes kmin..=kmax, entries drawn
    /// uniformly from the unit square and damped by `decay^|k|`.
    pub fn random(seed: u64, kmin: i64, kmax: i64, decay: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = BTreeMap::new();
        for k in kmin..=kmax {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            coeffs.insert(k, C64::new(re, im) * decay.powi(k.abs() as i32));
        }
        FourierSeries { coeffs, band: (kmin, kmax) }
    }

    /// e^ζ cut to modes 0..=band.
    pub fn truncated_exp(band: i64) -> Self {
        FourierSeries::new((0..=band).map(|k| (k, C64::new(inv_factorial(k), 0.0))).collect())
    }
}

pub type Sampler = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A weight known only through point evaluations on the circle; moments come
/// from the M-point trapezoid rule, computed once by FFT.
#[derive(Clone)]
pub struct QuadratureWeight {
    pub sampler: Sampler,
    pub band_hint: i64,
    pub points: usize,
    spectrum: Arc<Vec<C64>>,
}

impl fmt::Debug for QuadratureWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadratureWeight")
            .field("band_hint", &self.band_hint)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for QuadratureWeight {
    fn eq(&self, o: &Self) -> bool {
        self.band_hint == o.band_hint && self.points == o.points && self.spectrum == o.spectrum
    }
}

/// Default trapezoid point count: max(256, 2·band+1).
pub fn default_points(band_hint: i64) -> usize {
    256usize.max(2 * band_hint.max(0) as usize + 1)
}

impl QuadratureWeight {
    pub fn new(sampler: Sampler, band_hint: i64) -> Result<Self> {
        Self::with_points(sampler, band_hint, default_points(band_hint))
    }

    pub fn with_points(sampler: Sampler, band_hint: i64, points: usize) -> Result<Self> {
        if points < 2 * band_hint.max(0) as usize + 1 {
            return Err(Error::InvalidWeight(format!(
                "{points} quadrature points cannot resolve band {band_hint}"
            )));
        }
        let mut buf: Vec<C64> = (0..points)
            .map(|j| sampler(C64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64)))
            .collect();
        if buf.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidWeight("sampler returned a non-finite value".into()));
        }
        FftPlanner::new().plan_fft_forward(points).process(&mut buf);
        let scale = 1.0 / points as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
        Ok(QuadratureWeight { sampler, band_hint, points, spectrum: Arc::new(buf) })
    }

    pub fn moment(&self, k: i64) -> Result<C64> {
        if k.abs() > self.band_hint {
            return Err(Error::QuadratureBandExceeded { k, band: self.band_hint });
        }
        let m = self.points as i64;
        Ok(self.spectrum[k.rem_euclid(m) as usize])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// w(ζ) = e^ζ
    ExpLinear,
    /// w(ζ) = e^{ζ + u ζ^{-2}}
    ExpDeformed { u: C64 },
    FourierSeries(FourierSeries),
    Quadrature(QuadratureWeight),
}

impl Weight {
    pub fn moment(&self, k: i64) -> Result<C64> {
        match self {
            Weight::ExpLinear => Ok(C64::new(inv_factorial(k), 0.0)),
            Weight::ExpDeformed { u } => deformed_moment(*u, k),
            Weight::FourierSeries(fs) => Ok(fs.coeff(k)),
            Weight::Quadrature(q) => q.moment(k),
        }
    }

    pub fn eval(&self, zeta: C64) -> C64 {
        match self {
            Weight::ExpLinear => zeta.exp(),
            Weight::ExpDeformed { u } => (zeta + u * zeta.powi(-2)).exp(),
            Weight::FourierSeries(fs) => fs.eval(zeta),
            Weight::Quadrature(q) => (q.sampler)(zeta),
        }
    }

    /// Inclusive range of possibly nonzero moments, if finite.
    pub fn band(&self) -> Option<(i64, i64)> {
        match self {
            Weight::ExpLinear | Weight::ExpDeformed { .. } => None,
            Weight::FourierSeries(fs) => Some(fs.band),
            Weight::Quadrature(q) => Some((-q.band_hint, q.band_hint)),
        }
    }

    /// Parses `exp`, `expu:u=<re>[+<im>i]` or `fourier:<path.json>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "exp" {
            return Ok(Weight::ExpLinear);
        }
        if let Some(rest) = spec.strip_prefix("expu:") {
            let val = rest
                .strip_prefix("u=")
                .ok_or_else(|| Error::InvalidWeight(format!("expected u=<value> in {spec:?}")))?;
            return Ok(Weight::ExpDeformed { u: parse_complex(val)? });
        }
        if let Some(path) = spec.strip_prefix("fourier:") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidWeight(format!("{path}: {e}")))?;
            return Ok(Weight::FourierSeries(FourierSeries::from_json(&text)?));
        }
        Err(Error::InvalidWeight(format!("unknown weight spec {spec:?}")))
    }

    pub fn describe(&self) -> String {
        match self {
            Weight::ExpLinear => "exp".into(),
            Weight::ExpDeformed { u } => format!("expu:u={}", format_complex(*u)),
            Weight::FourierSeries(fs) => format!("fourier[{}..{}]", fs.band.0, fs.band.1),
            Weight::Quadrature(q) => format!("quadrature[band {}, M {}]", q.band_hint, q.points),
        }
    }
}

fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im > 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}{}i", z.re, z.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (exponents like `1e-3` allowed).
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::InvalidWeight(format!("cannot parse complex number {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let parse_im = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, parse_im(&body[i..])?))
        }
        None => Ok(C64::new(0.0, parse_im(body)?)),
    }
}

/// g_l(u) = ∮ ζ^{-l} e^{ζ+uζ^{-2}} dζ/(2πiζ).
///
/// For l ≥ 0 this is (1/Γ(l+1)) ₀F₂(; l/2+1, (l+1)/2; u/4); for l < 0 the
/// exponential is expanded term by term, g_l = Σ_{m ≥ -l/2} u^m/(m!(l+2m)!).
pub fn deformed_moment(u: C64, l: i64) -> Result<C64> {
    let not_converged = Error::SeriesNotConverged { what: "deformed moment", terms: DEFORMED_MAX_TERMS };
    if l >= 0 {
        let b1 = l as f64 / 2.0 + 1.0;
        let b2 = (l as f64 + 1.0) / 2.0;
        let f = hyp_pfq(&[], &[b1, b2], u / 4.0, DEFORMED_REL_TOL, DEFORMED_MAX_TERMS)
            .ok_or(not_converged)?;
        return Ok(f * inv_factorial(l));
    }
    if u == C64::new(0.0, 0.0) {
        return Ok(C64::new(0.0, 0.0));
    }
    let m0 = (-l + 1) / 2;
    // first term u^{m0}/(m0! (l+2m0)!), then ratio u/((m+1)(l+2m+1)(l+2m+2))
    let mut term = u.powi(m0 as i32) * inv_factorial(m0) * inv_factorial(l + 2 * m0);
    let mut sum = term;
    for i in 0..DEFORMED_MAX_TERMS {
        let m = m0 + i as i64;
        let k = l + 2 * m;
        term *= u / (((m + 1) * (k + 1) * (k + 2)) as f64);
        sum += term;
        if term.norm() < DEFORMED_REL_TOL * sum.norm() || term.norm() == 0.0 {
            return Ok(sum);
        }
    }
    Err(not_converged)
}

/// Cached moments over a fixed window [kmin, kmax].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub weight: Weight,
    pub kmin: i64,
    pub kmax: i64,
    values: Vec<C64>,
}

impl MomentTable {
    pub fn new(weight: &Weight, kmin: i64, kmax: i64) -> Result<Self> {
        if kmin > kmax {
            return Err(Error::InvalidWeight(format!("empty moment window [{kmin}, {kmax}]")));
        }
        let values = (kmin..=kmax).map(|k| weight.moment(k)).collect::<Result<Vec<_>>>()?;
        Ok(MomentTable { weight: weight.clone(), kmin, kmax, values })
    }

    pub fn get(&self, k: i64) -> Result<C64> {
        self.require(k, k)?;
        Ok(self.values[(k - self.kmin) as usize])
    }

    /// Unchecked read; callers must have validated the window.
    pub(crate) fn at(&self, k: i64) -> C64 {
        self.values[(k - self.kmin) as usize]
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        lo >= self.kmin && hi <= self.kmax
    }

    pub fn require(&self, lo: i64, hi: i64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::MomentWindowTooSmall {
                need_lo: lo,
                need_hi: hi,
                have_lo: self.kmin,
                have_hi: self.kmax,
            })
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

/// Eagerly tabulates moments over [kmin, kmax].
pub fn moment_table(w: &Weight, kmin: i64, kmax: i64) -> Result<MomentTable> {
    MomentTable::new(w, kmin, kmax)
}

pub fn moment(w: &Weight, k: i64) -> Result<C64> {
    w.moment(k)
}

/// M-point trapezoid approximation of w_k from point values of `f`.
pub fn trapezoid_moment(f: &dyn Fn(C64) -> C64, k: i64, points: usize) -> C64 {
    let mut acc = crate::special::Kahan::default();
    for j in 0..points {
        let zeta = C64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64);
        acc.add(f(zeta) * zeta.powi(-(k as i32)));
    }
    acc.value() / points as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_moments() {
        assert!((moment(&Weight::ExpLinear, 3).unwrap() - c(1.0 / 6.0, 0.0)).norm() < 1e-16);
        assert_eq!(moment(&Weight::ExpLinear, -1).unwrap(), c(0.0, 0.0));
        let fs = Weight::FourierSeries(FourierSeries::from_pairs(&[(0, c(1.0, 0.0))]));
        assert_eq!(moment(&fs, 0).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn deformed_small_cases() {
        assert!((deformed_moment(c(0.0, 0.0), 2).unwrap() - c(0.5, 0.0)).norm() < 1e-16);
        assert_eq!(deformed_moment(c(0.0, 0.0), -1).unwrap(), c(0.0, 0.0));
        let u = c(1.0, 0.0);
        let q = trapezoid_moment(&|z| (z + u * z.powi(-2)).exp(), 0, 256);
        assert!((deformed_moment(u, 0).unwrap() - q).norm() < 1e-14);
    }

    #[test]
    fn tables() {
        let t = moment_table(&Weight::ExpLinear, -2, 2).unwrap();
        let want = [0.0, 0.0, 1.0, 1.0, 0.5];
        for (v, w) in t.values().iter().zip(want) {
            assert!((v - c(w, 0.0)).norm() < 1e-16);
        }
        let fs = Weight::FourierSeries(FourierSeries::from_pairs(&[(1, c(5.0, 0.0))]));
        let t = moment_table(&fs, 0, 1).unwrap();
        assert_eq!(t.values(), &[c(0.0, 0.0), c(5.0, 0.0)]);
        let a = moment_table(&Weight::ExpDeformed { u: c(0.0, 0.0) }, 0, 3).unwrap();
        let b = moment_table(&Weight::ExpLinear, 0, 3).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(matches!(t.get(5), Err(Error::MomentWindowTooSmall { .. })));
    }

    #[test]
    fn quadrature_band() {
        let q = QuadratureWeight::new(Arc::new(|z: C64| z.exp()), 20).unwrap();
        assert_eq!(q.points, 256);
        assert!((q.moment(4).unwrap() - c(1.0 / 24.0, 0.0)).norm() < 1e-15);
        assert!(matches!(q.moment(21), Err(Error::QuadratureBandExceeded { .. })));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(Weight::from_spec("exp").unwrap(), Weight::ExpLinear);
        assert_eq!(Weight::from_spec("expu:u=1").unwrap(), Weight::ExpDeformed { u: c(1.0, 0.0) });
        assert_eq!(parse_complex("0.5+2i").unwrap(), c(0.5, 2.0));
        assert_eq!(parse_complex("-0.5-1e-3i").unwrap(), c(-0.5, -1e-3));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), c(0.0, 2.5));
        assert!(Weight::from_spec("gauss").is_err());
        assert!(parse_complex("1+").is_err());
    }

    #[test]
    fn fourier_json_round_trip() {
        let fs = FourierSeries::random(3, -4, 5, 0.8);
        let back = FourierSeries::from_json(&fs.to_json()).unwrap();
        assert_eq!(back, fs);
        let fs = FourierSeries::from_json(r#"{"coeffs": {"0": [1, 0], "-2": [0.5, 0.25]}}"#).unwrap();
        assert_eq!(fs.band, (-2, 0));
        assert_eq!(fs.coeff(-2), c(0.5, 0.25));
    }

    proptest! {
        #[test]
        fn trapezoid_reproduces_fourier(seed in 0u64..1000, k in -8i64..8) {
            let fs = FourierSeries::random(seed, -6, 6, 0.9);
            let w = Weight::FourierSeries(fs.clone());
            let q = trapezoid_moment(&|z| fs.eval(z), k, 64);
            let m = w.moment(k).unwrap();
            prop_assert!((q - m).norm() <= 1e-12 * (1.0 + m.norm()));
        }

        #[test]
        fn deformed_matches_quadrature(re in -2.0f64..2.0, im in -2.0f64..2.0, l in -6i64..8) {
            let u = c(re, im);
            let g = deformed_moment(u, l).unwrap();
            let q = trapezoid_moment(&|z| (z + u * z.powi(-2)).exp(), l, 256);
            let scale = (0..6).map(|k| deformed_moment(u, k).unwrap().norm()).fold(1.0, f64::max);
            prop_assert!((g - q).norm() <= 1e-12 * scale);
        }

        #[test]
        fn exp_moments_match_quadrature(k in -5i64..20) {
            let q = trapezoid_moment(&|z| z.exp(), k, 256);
            let m = Weight::ExpLinear.moment(k).unwrap();
            // relative to the largest moment w_0 = 1
            prop_assert!((q - m).norm() <= 1e-12);
        }
    }
}
