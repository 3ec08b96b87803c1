use std::collections::BTreeMap;
use std::str::FromStr;

use super::{DtPolicy, RunConfig};
use crate::error::{Error, Result};
use crate::fem1d::Flux;
use crate::integrators::Scheme;

/// Parses `key = value` lines; `#` starts a comment. Later keys win.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::input(format!("config line {}: expected key = value", i + 1)))?;
        let key = canonical_key(k.trim());
        let v = v.trim();
        if key.is_empty() || v.is_empty() {
            return Err(Error::input(format!(
                "config line {}: empty key or value",
                i + 1
            )));
        }
        out.insert(key, v.to_string());
    }
    Ok(out)
}

pub(crate) fn canonical_key(k: &str) -> String {
    let k = k.to_ascii_lowercase().replace('-', "_");
    match k.as_str() {
        "e" => "overlap".into(),
        "h_coarse" => "h".into(),
        "alpha" => "penalty".into(),
        "t" => "t_final".into(),
        "discretization" => "disc".into(),
        _ => k,
    }
}

/// `ab` with `k`, or a fully named scheme such as `ab3` or `lfme4`.
pub fn parse_scheme(name: &str, k: Option<usize>) -> Result<Scheme> {
    let name = name.trim().to_ascii_lowercase();
    if name == "ab" {
        let k = k.unwrap_or(4);
        if !(2..=4).contains(&k) {
            return Err(Error::input(format!(
                "AB order k must be 2, 3 or 4, got {k}"
            )));
        }
        return Ok(Scheme::Ab(k));
    }
    let s = Scheme::from_str(&name)?;
    match (s, k) {
        (_, None) => Ok(s),
        (Scheme::Ab(a), Some(b)) if a == b => Ok(s),
        (Scheme::Ab(a), Some(b)) => {
            Err(Error::input(format!("scheme ab{a} conflicts with k = {b}")))
        }
        (_, Some(_)) => Err(Error::input("k only applies to Adams-Bashforth schemes")),
    }
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::input(format!("invalid value '{v}' for {key}")))
}

pub(crate) fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| value(key, s)).collect()
}

/// Settings that are not part of [`RunConfig`].
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Extras {
    pub steps: Option<usize>,
    pub p_list: Option<Vec<usize>>,
    pub e_list: Option<Vec<usize>>,
}

/// Builds a validated configuration from merged settings.
pub(crate) fn build_config(map: &BTreeMap<String, String>) -> Result<(RunConfig, Extras)> {
    let mut cfg = RunConfig::default();
    let mut extras = Extras::default();
    let mut scheme_name = None;
    let mut k = None;
    if map.contains_key("dt") && map.contains_key("dt_fraction") {
        return Err(Error::input("give either dt or dt_fraction, not both"));
    }
    for (key, v) in map {
        match key.as_str() {
            "disc" => cfg.disc = v.parse()?,
            "order" => cfg.order = value(key, v)?,
            "scheme" => scheme_name = Some(v.clone()),
            "k" => k = Some(value(key, v)?),
            "p" => cfg.p = value(key, v)?,
            "overlap" => cfg.overlap = value(key, v)?,
            "h" => cfg.h_coarse = list(key, v)?,
            "sigma" => cfg.sigma = value(key, v)?,
            "c" => cfg.c = value(key, v)?,
            "penalty" => cfg.penalty = value(key, v)?,
            "t_final" => cfg.t_final = value(key, v)?,
            "dt" => cfg.dt = DtPolicy::Fixed(value(key, v)?),
            "dt_fraction" => cfg.dt = DtPolicy::Fraction(value(key, v)?),
            "flux" => {
                cfg.flux = match v.to_ascii_lowercase().as_str() {
                    "upwind" => Flux::Upwind,
                    "central" => Flux::Central,
                    other => return Err(Error::input(format!("unknown flux '{other}'"))),
                }
            }
            "steps" => extras.steps = Some(value(key, v)?),
            "p_list" => extras.p_list = Some(list(key, v)?),
            "e_list" => extras.e_list = Some(list(key, v)?),
            other => return Err(Error::input(format!("unknown setting '{other}'"))),
        }
    }
    cfg.scheme = match (scheme_name, k) {
        (Some(name), k) => parse_scheme(&name, k)?,
        (None, Some(k)) => parse_scheme("ab", Some(k))?,
        (None, None) => cfg.scheme,
    };
    cfg.validate()?;
    Ok((cfg, extras))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Discretization;

    #[test]
    fn parses_comments_and_aliases() {
        let m = parse_config("# study\ndisc = ipdg\norder=3 # cubic\n\nscheme = ab\nk = 3\nh-coarse = 0.2, 0.1,0.05\nT = 2\n").unwrap();
        let (cfg, _) = build_config(&m).unwrap();
        assert_eq!(cfg.disc, Discretization::Ipdg);
        assert_eq!(cfg.order, 3);
        assert_eq!(cfg.scheme, Scheme::Ab(3));
        assert_eq!(cfg.h_coarse, vec![0.2, 0.1, 0.05]);
        assert_eq!(cfg.t_final, 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config("order 3").is_err());
        assert!(build_config(&parse_config("colour = red").unwrap()).is_err());
        assert!(build_config(&parse_config("order = x").unwrap()).is_err());
        assert!(build_config(&parse_config("dt = 0.1\ndt_fraction = 0.5").unwrap()).is_err());
        assert!(build_config(&parse_config("scheme = lf2\nk = 3").unwrap()).is_err());
    }

    #[test]
    fn scheme_names() {
        assert_eq!(parse_scheme("ab", None).unwrap(), Scheme::Ab(4));
        assert_eq!(parse_scheme("AB", Some(2)).unwrap(), Scheme::Ab(2));
        assert_eq!(parse_scheme("ab3", Some(3)).unwrap(), Scheme::Ab(3));
        assert!(parse_scheme("ab3", Some(4)).is_err());
        assert!(parse_scheme("ab", Some(5)).is_err());
        assert_eq!(parse_scheme("lfcn2", None).unwrap(), Scheme::Lfcn2);
    }
}
