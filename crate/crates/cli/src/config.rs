//! `key = value` experiment files and `--algo` specs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use vsn_offload::pipeline::{AlgorithmKind, AlgorithmSpec};

/// Settings that may come from a config file or from flags. Everything is
/// optional so the two sources can be layered.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub trace: Option<PathBuf>,
    pub algos: Vec<String>,
    pub d: Option<u32>,
    pub k: Option<u32>,
    pub slots: Option<u32>,
    pub direction: Option<bool>,
    pub radius: Option<f64>,
    pub angle: Option<f64>,
    pub period: Option<f64>,
    pub packet_size: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub exact_limit: Option<usize>,
    pub roadway: RoadwaySettings,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoadwaySettings {
    pub vehicles: Option<usize>,
    pub area: Option<f64>,
    pub duration: Option<f64>,
    pub speed_min: Option<f64>,
    pub speed_max: Option<f64>,
    pub lane_separation: Option<f64>,
    pub sample_period: Option<f64>,
}

impl RoadwaySettings {
    pub fn any_set(&self) -> bool {
        *self != RoadwaySettings::default()
    }

    pub fn overlay(self, base: RoadwaySettings) -> RoadwaySettings {
        RoadwaySettings {
            vehicles: self.vehicles.or(base.vehicles),
            area: self.area.or(base.area),
            duration: self.duration.or(base.duration),
            speed_min: self.speed_min.or(base.speed_min),
            speed_max: self.speed_max.or(base.speed_max),
            lane_separation: self.lane_separation.or(base.lane_separation),
            sample_period: self.sample_period.or(base.sample_period),
        }
    }
}

impl Settings {
    /// `self` wins wherever it has a value. A non-empty algorithm list
    /// replaces the base list rather than extending it.
    pub fn overlay(self, base: Settings) -> Settings {
        Settings {
            trace: self.trace.or(base.trace),
            algos: if self.algos.is_empty() { base.algos } else { self.algos },
            d: self.d.or(base.d),
            k: self.k.or(base.k),
            slots: self.slots.or(base.slots),
            direction: self.direction.or(base.direction),
            radius: self.radius.or(base.radius),
            angle: self.angle.or(base.angle),
            period: self.period.or(base.period),
            packet_size: self.packet_size.or(base.packet_size),
            window: self.window.or(base.window),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            exact_limit: self.exact_limit.or(base.exact_limit),
            roadway: self.roadway.overlay(base.roadway),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("`{key}`: cannot parse `{value}`: {e}"))
}

pub fn parse_bool(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("expected a boolean, got `{s}`"),
    }
}

pub fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("window must be `start,end`, got `{s}`"))?;
    Ok((parse_value("window", a.trim())?, parse_value("window", b.trim())?))
}

/// Parses the body of a config file. Blank lines and `#` comments are
/// skipped; `algo` may repeat.
pub fn parse_settings(text: &str) -> Result<Settings> {
    let mut s = Settings::default();
    let mut seen = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key != "algo" {
            if let Some(prev) = seen.insert(key.to_string(), line_no) {
                bail!("line {line_no}: `{key}` already set on line {prev}");
            }
        }
        let ctx = || format!("line {line_no}");
        match key {
            "trace" => s.trace = Some(PathBuf::from(value)),
            "algo" => s.algos.push(value.to_string()),
            "d" => s.d = Some(parse_value(key, value).with_context(ctx)?),
            "k" => s.k = Some(parse_value(key, value).with_context(ctx)?),
            "slots" => s.slots = Some(parse_value(key, value).with_context(ctx)?),
            "direction" => s.direction = Some(parse_bool(value).with_context(ctx)?),
            "radius" => s.radius = Some(parse_value(key, value).with_context(ctx)?),
            "angle" => s.angle = Some(parse_value(key, value).with_context(ctx)?),
            "period" => s.period = Some(parse_value(key, value).with_context(ctx)?),
            "packet_size" => s.packet_size = Some(parse_value(key, value).with_context(ctx)?),
            "window" => s.window = Some(parse_window(value).with_context(ctx)?),
            "seed" => s.seed = Some(parse_value(key, value).with_context(ctx)?),
            "out" => s.out = Some(PathBuf::from(value)),
            "exact_limit" => s.exact_limit = Some(parse_value(key, value).with_context(ctx)?),
            "vehicles" => s.roadway.vehicles = Some(parse_value(key, value).with_context(ctx)?),
            "area" => s.roadway.area = Some(parse_value(key, value).with_context(ctx)?),
            "duration" => s.roadway.duration = Some(parse_value(key, value).with_context(ctx)?),
            "speed_min" => s.roadway.speed_min = Some(parse_value(key, value).with_context(ctx)?),
            "speed_max" => s.roadway.speed_max = Some(parse_value(key, value).with_context(ctx)?),
            "lane_separation" => s.roadway.lane_separation = Some(parse_value(key, value).with_context(ctx)?),
            "sample_period" => s.roadway.sample_period = Some(parse_value(key, value).with_context(ctx)?),
            other => bail!("line {line_no}: unknown key `{other}`"),
        }
    }
    Ok(s)
}

pub fn load_settings(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_settings(&text).with_context(|| format!("in config {}", path.display()))
}

/// Defaults applied to algorithms that do not override them inline.
#[derive(Clone, Copy, Debug)]
pub struct AlgoDefaults {
    pub d: u32,
    pub k: u32,
    pub slots: u32,
    pub direction: bool,
}

/// `centrality`, `rb:slots=64`, `centrality:d=3,k=4,direction`,
/// `exact:d=2,direction=false`.
pub fn parse_algo(spec: &str, defaults: AlgoDefaults) -> Result<AlgorithmSpec> {
    let (name, opts) = match spec.split_once(':') {
        Some((n, o)) => (n.trim(), o),
        None => (spec.trim(), ""),
    };
    let kind: AlgorithmKind = name.parse()?;
    let mut a = AlgorithmSpec {
        kind,
        d: defaults.d,
        k: defaults.k,
        slots: defaults.slots,
        direction: defaults.direction,
    };
    for opt in opts.split(',').map(str::trim).filter(|o| !o.is_empty()) {
        let (key, value) = match opt.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (opt, None),
        };
        match (key, value) {
            ("d", Some(v)) => a.d = parse_value(key, v)?,
            ("k", Some(v)) => a.k = parse_value(key, v)?,
            ("slots" | "t", Some(v)) => a.slots = parse_value(key, v)?,
            ("direction", None) => a.direction = true,
            ("direction", Some(v)) => a.direction = parse_bool(v)?,
            _ => bail!("`{spec}`: unknown option `{opt}`"),
        }
    }
    if kind == AlgorithmKind::Rb && a.d != 1 && opts.contains("d=") {
        bail!("`{spec}`: rb is a one-hop scheme and takes no `d`");
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULTS: AlgoDefaults = AlgoDefaults {
        d: 1,
        k: 4,
        slots: 256,
        direction: false,
    };

    #[test]
    fn parses_file() {
        let s = parse_settings(
            "# experiment\ntrace = a.csv\nalgo = centrality\nalgo = rb:slots=64\n\nradius=120 # meters\nwindow = 10, 50\ndirection = yes\n",
        )
        .unwrap();
        assert_eq!(s.trace, Some(PathBuf::from("a.csv")));
        assert_eq!(s.algos, vec!["centrality", "rb:slots=64"]);
        assert_eq!(s.radius, Some(120.0));
        assert_eq!(s.window, Some((10.0, 50.0)));
        assert_eq!(s.direction, Some(true));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_settings("radius 100").is_err());
        assert!(parse_settings("colour = red").is_err());
        assert!(parse_settings("d = two").is_err());
        assert!(parse_settings("d = 1\nd = 2").is_err());
    }

    #[test]
    fn flags_win() {
        let file = parse_settings("radius = 120\nseed = 3\nalgo = rb").unwrap();
        let flags = Settings {
            seed: Some(9),
            algos: vec!["exact".into()],
            ..Default::default()
        };
        let merged = flags.overlay(file);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.radius, Some(120.0));
        assert_eq!(merged.algos, vec!["exact"]);
    }

    #[test]
    fn algo_specs() {
        let a = parse_algo("centrality:d=3,k=4,direction", DEFAULTS).unwrap();
        assert_eq!(a, AlgorithmSpec::centrality(3, 4).with_direction(true));
        assert_eq!(parse_algo("rb", DEFAULTS).unwrap(), AlgorithmSpec::rb(256));
        assert_eq!(parse_algo("rb:slots=8", DEFAULTS).unwrap(), AlgorithmSpec::rb(8));
        assert_eq!(parse_algo("exact:d=2", DEFAULTS).unwrap(), AlgorithmSpec::exact(2));
        assert!(parse_algo("rb:d=2", DEFAULTS).is_err());
        assert!(parse_algo("greedy", DEFAULTS).is_err());
        assert!(parse_algo("centrality:q=1", DEFAULTS).is_err());
    }
}
