//! Stimulus manifests: which reference/adversarial files form a pair, how the
//! pair was generated, and optionally its precomputed MOS.
//!
//! CSV columns: `stimulus_id,ref_path,test_path,attack,param_name,param_value,mos,ci95`
//! (the last two optional). Relative paths resolve against the manifest's
//! directory. The JSON form is `{"schema_version": 1, "root": "...", "pairs": [...]}`
//! with the same per-pair keys; `param_value` may be a number, a `"v1;v2"`
//! string or a two-element array.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use advfid_core::load_image;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

const REQUIRED_COLUMNS: [&str; 6] = [
    "stimulus_id",
    "ref_path",
    "test_path",
    "attack",
    "param_name",
    "param_value",
];

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {} has {} problem(s):\n  {}", .path.display(), .issues.len(), .issues.join("\n  "))]
    Invalid { path: PathBuf, issues: Vec<String> },
}

impl ManifestError {
    pub fn issues(&self) -> &[String] {
        match self {
            ManifestError::Io { .. } => &[],
            ManifestError::Invalid { issues, .. } => issues,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Attack {
    Fgsm,
    Bim,
    Deepfool,
    CarliniWagner,
    Pgd,
    Mim,
}

impl Attack {
    pub const ALL: [Attack; 6] = [
        Attack::Fgsm,
        Attack::Bim,
        Attack::Deepfool,
        Attack::CarliniWagner,
        Attack::Pgd,
        Attack::Mim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attack::Fgsm => "FGSM",
            Attack::Bim => "BIM",
            Attack::Deepfool => "Deepfool",
            Attack::CarliniWagner => "C&W",
            Attack::Pgd => "PGD",
            Attack::Mim => "MIM",
        }
    }

    /// Parameter controlling the perturbation magnitude.
    pub fn param_name(self) -> &'static str {
        match self {
            Attack::Deepfool => "overshoot",
            Attack::CarliniWagner => "confidence;learning_rate",
            _ => "epsilon",
        }
    }

    pub fn arity(self) -> usize {
        if self == Attack::CarliniWagner {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attack {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "fgsm" => Attack::Fgsm,
            "bim" => Attack::Bim,
            "deepfool" => Attack::Deepfool,
            "cw" | "carliniwagner" => Attack::CarliniWagner,
            "pgd" => Attack::Pgd,
            "mim" => Attack::Mim,
            _ => return Err(format!("unknown attack {s:?}")),
        })
    }
}

fn normalize_param_name(s: &str) -> String {
    let t: String = s
        .chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '(' | ')'))
        .map(|c| if c == ',' { ';' } else { c })
        .collect::<String>()
        .to_lowercase();
    match t.as_str() {
        "eps" | "ε" => "epsilon".into(),
        _ => t,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Single(f64),
    Pair(f64, f64),
}

impl ParamValue {
    pub fn arity(&self) -> usize {
        match self {
            ParamValue::Single(_) => 1,
            ParamValue::Pair(..) => 2,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Single(v) => write!(f, "{v}"),
            ParamValue::Pair(a, b) => write!(f, "{a};{b}"),
        }
    }
}

impl FromStr for ParamValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad parameter value {s:?}"))
        };
        let parts: Vec<&str> = s
            .trim()
            .trim_matches(|c| c == '(' || c == ')')
            .split([';', ','])
            .collect();
        match parts.as_slice() {
            [v] => Ok(ParamValue::Single(parse(v)?)),
            [a, b] => Ok(ParamValue::Pair(parse(a)?, parse(b)?)),
            _ => Err(format!(
                "parameter value {s:?} must hold one or two numbers"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StimulusPair {
    pub stimulus_id: String,
    pub ref_path: PathBuf,
    pub test_path: PathBuf,
    pub attack: Attack,
    pub param_name: String,
    pub param_value: ParamValue,
    pub mos: Option<f64>,
    pub ci95: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub root: PathBuf,
    pub schema_version: u32,
    pub pairs: Vec<StimulusPair>,
}

impl Manifest {
    /// True when every pair carries a MOS value.
    pub fn has_mos(&self) -> bool {
        !self.pairs.is_empty() && self.pairs.iter().all(|p| p.mos.is_some())
    }
}

/// How much of the referenced imagery is checked while loading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageCheck {
    /// Decode every image and compare reference/test shapes.
    #[default]
    Eager,
    /// Only check that the files exist.
    Lazy,
}

/// One manifest row as text, before validation.
#[derive(Debug, Default, Deserialize)]
struct RawRow {
    stimulus_id: String,
    ref_path: String,
    test_path: String,
    attack: String,
    param_name: String,
    param_value: String,
    #[serde(default)]
    mos: Option<String>,
    #[serde(default)]
    ci95: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonManifest {
    schema_version: u32,
    #[serde(default)]
    root: Option<PathBuf>,
    pairs: Vec<JsonRow>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    stimulus_id: String,
    ref_path: String,
    test_path: String,
    attack: String,
    param_name: String,
    param_value: serde_json::Value,
    #[serde(default)]
    mos: Option<f64>,
    #[serde(default)]
    ci95: Option<f64>,
}

impl JsonRow {
    fn into_raw(self) -> Result<RawRow, String> {
        let param_value = match &self.param_value {
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .map(|f| f.to_string())
                        .ok_or_else(|| format!("non-numeric parameter {v}"))
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(";"),
            other => return Err(format!("unsupported parameter value {other}")),
        };
        Ok(RawRow {
            stimulus_id: self.stimulus_id,
            ref_path: self.ref_path,
            test_path: self.test_path,
            attack: self.attack,
            param_name: self.param_name,
            param_value,
            mos: self.mos.map(|v| v.to_string()),
            ci95: self.ci95.map(|v| v.to_string()),
        })
    }
}

/// Loads and validates a CSV or JSON manifest (chosen by extension, `.json`
/// for JSON). Every problem found is reported, not just the first.
pub fn load_manifest(path: impl AsRef<Path>, check: ImageCheck) -> Result<Manifest, ManifestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let invalid = |issues: Vec<String>| ManifestError::Invalid {
        path: path.to_path_buf(),
        issues,
    };
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (root, rows) = if is_json {
        parse_json(&text, &base).map_err(invalid)?
    } else {
        (base, parse_csv(&text).map_err(invalid)?)
    };
    let mut issues = Vec::new();
    let pairs = validate(rows, &root, check, &mut issues);
    if issues.is_empty() {
        Ok(Manifest {
            root,
            schema_version: SCHEMA_VERSION,
            pairs,
        })
    } else {
        Err(invalid(issues))
    }
}

/// Rows paired with their 1-based source line (or array index for JSON).
type Located = Vec<(String, Result<RawRow, String>)>;

fn parse_csv(text: &str) -> Result<Located, Vec<String>> {
    if text.trim().is_empty() {
        return Err(vec!["file is empty; expected a header row".into()]);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| vec![format!("unreadable header: {e}")])?
        .clone();
    let missing: Vec<String> = REQUIRED_COLUMNS
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .map(|c| format!("missing column {c:?}"))
        .collect();
    if !missing.is_empty() {
        return Err(missing);
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        match record {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line());
                let row = rec
                    .deserialize::<RawRow>(Some(&headers))
                    .map_err(|e| e.to_string());
                rows.push((format!("line {line}"), row));
            }
            Err(e) => rows.push((String::from("record"), Err(e.to_string()))),
        }
    }
    if rows.is_empty() {
        return Err(vec!["no stimulus rows after the header".into()]);
    }
    Ok(rows)
}

fn parse_json(text: &str, base: &Path) -> Result<(PathBuf, Located), Vec<String>> {
    let doc: JsonManifest =
        serde_json::from_str(text).map_err(|e| vec![format!("schema violation: {e}")])?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(vec![format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )]);
    }
    if doc.pairs.is_empty() {
        return Err(vec!["\"pairs\" is empty".into()]);
    }
    let root = match doc.root {
        Some(r) if r.is_absolute() => r,
        Some(r) => base.join(r),
        None => base.to_path_buf(),
    };
    let rows = doc
        .pairs
        .into_iter()
        .enumerate()
        .map(|(i, r)| (format!("pairs[{i}]"), r.into_raw()))
        .collect();
    Ok((root, rows))
}

fn parse_optional(field: &str, v: &Option<String>) -> Result<Option<f64>, String> {
    match v.as_deref().map(str::trim) {
        None | Some("") => Ok(None),
        Some(t) => t
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| format!("{field} {t:?} is not a finite number")),
    }
}

fn validate(
    rows: Located,
    root: &Path,
    check: ImageCheck,
    issues: &mut Vec<String>,
) -> Vec<StimulusPair> {
    let mut pairs = Vec::with_capacity(rows.len());
    let mut seen: HashMap<String, String> = HashMap::new();
    for (at, row) in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                issues.push(format!("{at}: {e}"));
                continue;
            }
        };
        let mut row_issues = Vec::new();
        if row.stimulus_id.is_empty() {
            row_issues.push("empty stimulus_id".to_string());
        } else if let Some(first) = seen.insert(row.stimulus_id.clone(), at.clone()) {
            row_issues.push(format!(
                "duplicate stimulus_id {:?} (first at {first})",
                row.stimulus_id
            ));
        }
        let attack = row
            .attack
            .parse::<Attack>()
            .map_err(|e| row_issues.push(e))
            .ok();
        let value = row
            .param_value
            .parse::<ParamValue>()
            .map_err(|e| row_issues.push(e))
            .ok();
        if let Some(a) = attack {
            if normalize_param_name(&row.param_name) != normalize_param_name(a.param_name()) {
                row_issues.push(format!(
                    "{a} expects parameter {:?}, got {:?}",
                    a.param_name(),
                    row.param_name
                ));
            }
            if let Some(v) = value.filter(|v| v.arity() != a.arity()) {
                row_issues.push(format!(
                    "{a} takes {} parameter value(s), got {v}",
                    a.arity()
                ));
            }
        }
        let mos = parse_optional("mos", &row.mos)
            .map_err(|e| row_issues.push(e))
            .ok()
            .flatten();
        let ci95 = parse_optional("ci95", &row.ci95)
            .map_err(|e| row_issues.push(e))
            .ok()
            .flatten();
        if mos.is_some_and(|m| !(1.0..=5.0).contains(&m)) {
            row_issues.push(format!("mos {} is outside [1, 5]", mos.unwrap()));
        }
        if ci95.is_some_and(|c| c < 0.0) {
            row_issues.push("negative ci95".into());
        }
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                root.join(p)
            }
        };
        let (ref_path, test_path) = (resolve(&row.ref_path), resolve(&row.test_path));
        let mut files_ok = true;
        for (label, p) in [("reference", &ref_path), ("test", &test_path)] {
            if !p.is_file() {
                row_issues.push(format!("{label} image {} not found", p.display()));
                files_ok = false;
            }
        }
        if files_ok && check == ImageCheck::Eager {
            match (load_image(&ref_path), load_image(&test_path)) {
                (Ok(a), Ok(b)) if !a.same_shape(&b) => row_issues.push(format!(
                    "shape mismatch: reference {}x{}x{} vs test {}x{}x{}",
                    a.width(),
                    a.height(),
                    a.channels(),
                    b.width(),
                    b.height(),
                    b.channels()
                )),
                (a, b) => {
                    for e in [a.err(), b.err()].into_iter().flatten() {
                        row_issues.push(e.to_string());
                    }
                }
            }
        }
        if row_issues.is_empty() {
            pairs.push(StimulusPair {
                stimulus_id: row.stimulus_id,
                ref_path,
                test_path,
                attack: attack.expect("validated"),
                param_name: row.param_name,
                param_value: value.expect("validated"),
                mos,
                ci95,
            });
        } else {
            let id = if row.stimulus_id.is_empty() {
                "?"
            } else {
                &row.stimulus_id
            };
            issues.extend(row_issues.into_iter().map(|e| format!("{at} ({id}): {e}")));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_names_round_trip() {
        for a in Attack::ALL {
            assert_eq!(a.name().parse::<Attack>().unwrap(), a);
        }
        assert_eq!("cw".parse::<Attack>().unwrap(), Attack::CarliniWagner);
        assert_eq!("DeepFool".parse::<Attack>().unwrap(), Attack::Deepfool);
        assert!("jsma".parse::<Attack>().is_err());
    }

    #[test]
    fn param_values() {
        assert_eq!(
            "0.03".parse::<ParamValue>().unwrap(),
            ParamValue::Single(0.03)
        );
        assert_eq!(
            "10;0.4".parse::<ParamValue>().unwrap(),
            ParamValue::Pair(10.0, 0.4)
        );
        assert_eq!(
            "(30, 1.3)".parse::<ParamValue>().unwrap(),
            ParamValue::Pair(30.0, 1.3)
        );
        assert!("1;2;3".parse::<ParamValue>().is_err());
        assert!("nan".parse::<ParamValue>().is_err());
        assert_eq!(ParamValue::Pair(10.0, 0.4).to_string(), "10;0.4");
    }

    #[test]
    fn param_name_spellings() {
        assert_eq!(
            normalize_param_name("(confidence, learning_rate)"),
            "confidence;learning_rate"
        );
        assert_eq!(normalize_param_name("Epsilon"), "epsilon");
        assert_eq!(normalize_param_name("ε"), "epsilon");
    }
}
