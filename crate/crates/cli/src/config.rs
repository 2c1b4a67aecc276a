use biocirc::weights::parse_complex;
use biocirc::{Kind, C64};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KindArg {
    #[serde(rename = "2jk")]
    TwoJK,
    #[serde(rename = "j2k")]
    JTwoK,
}

impl FromStr for KindArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "2jk" | "2j-k" => Ok(KindArg::TwoJK),
            "j2k" | "j-2k" => Ok(KindArg::JTwoK),
            _ => Err(format!("unknown kind {s:?}, expected 2jk or j2k")),
        }
    }
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::TwoJK => Kind::TwoJK,
            KindArg::JTwoK => Kind::JTwoK,
        }
    }
}

/// A complex number on the command line: `a`, `bi`, `a+bi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZArg(pub C64);

impl FromStr for ZArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_complex(s).map(ZArg).map_err(|e| e.to_string())
    }
}

/// `suite=value`
pub fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|_| format!("bad tolerance {v:?}"))?;
    if !(v > 0.0) {
        return Err(format!("tolerance must be positive, got {v}"));
    }
    Ok((k.to_string(), v))
}

/// Everything a command was run with; echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub weight: String,
    pub kind: KindArg,
    pub offset: i64,
    pub n: usize,
    #[serde(with = "complex_list")]
    pub z: Vec<C64>,
    pub tolerances: BTreeMap<String, f64>,
    pub points: Option<usize>,
    pub format: Format,
    pub seed: u64,
}

mod complex_list {
    use biocirc::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[a, b]| C64::new(a, b)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            command: "poly".into(),
            weight: "expu:u=0.5-1i".into(),
            kind: KindArg::JTwoK,
            offset: -2,
            n: 4,
            z: vec![C64::new(0.1, -0.7), C64::new(1.0 / 3.0, 0.0)],
            tolerances: BTreeMap::from([("recur".to_string(), 1e-8)]),
            points: Some(1024),
            format: Format::Csv,
            seed: 7,
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn arguments() {
        assert_eq!("j-2k".parse::<KindArg>().unwrap(), KindArg::JTwoK);
        assert!("jk".parse::<KindArg>().is_err());
        assert_eq!("1-2i".parse::<ZArg>().unwrap().0, C64::new(1.0, -2.0));
        assert_eq!(parse_tol("mixed=1e-8").unwrap(), ("mixed".into(), 1e-8));
        assert!(parse_tol("mixed=-1").is_err());
    }
}
