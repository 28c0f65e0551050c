//! JSON instance files.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use super::{BumpInstance, InstanceError};
use crate::bump::PROFILE_TAG;

pub const SCHEMA_VERSION: u32 = 1;

/// Residuals of the mass equation above this are reported on load.
const RESIDUAL_WARN: f64 = 1e-6;

/// On-disk layout of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub d: usize,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub centers: Vec<Vec<f64>>,
    pub omega_index: usize,
    pub phi: String,
}

impl From<&BumpInstance> for InstanceFile {
    fn from(inst: &BumpInstance) -> Self {
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            d: inst.d(),
            r: inst.r(),
            big_r: inst.big_r(),
            centers: inst.centers().to_vec(),
            omega_index: inst.omega_index(),
            phi: PROFILE_TAG.to_string(),
        }
    }
}

/// Writes floats with 17 significant digits.
struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json(inst: &BumpInstance) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    InstanceFile::from(inst).serialize(&mut ser).expect("serializing plain data cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn save_instance(inst: &BumpInstance, path: &Path) -> Result<(), InstanceError> {
    std::fs::write(path, to_json(inst))?;
    Ok(())
}

/// A loaded instance together with non-fatal findings.
#[derive(Debug, Clone)]
pub struct LoadReport {
    pub instance: BumpInstance,
    pub residual: f64,
    pub warnings: Vec<String>,
}

pub fn from_json(text: &str) -> Result<LoadReport, InstanceError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| InstanceError::Schema(e.to_string()))?;
    if let Some(v) = raw.get("schema_version").and_then(|v| v.as_u64()) {
        if v != SCHEMA_VERSION as u64 {
            return Err(InstanceError::Version { found: v as u32, expected: SCHEMA_VERSION });
        }
    }
    let file: InstanceFile = serde_json::from_value(raw).map_err(|e| InstanceError::Schema(e.to_string()))?;
    if file.phi != PROFILE_TAG {
        return Err(InstanceError::Schema(format!("unknown profile {:?}, expected {PROFILE_TAG:?}", file.phi)));
    }
    let instance = BumpInstance::with_centers(file.d, file.r, file.big_r, file.centers, file.omega_index)?;
    let residual = instance.residual()?;
    let mut warnings = Vec::new();
    if residual > RESIDUAL_WARN {
        warnings.push(format!("r and R do not satisfy the mass equation: relative residual {residual:.3e}"));
    }
    Ok(LoadReport { instance, residual, warnings })
}

pub fn load_instance(path: &Path) -> Result<LoadReport, InstanceError> {
    from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let inst = BumpInstance::from_eps(1, 1e-2, &Default::default()).unwrap().with_omega(3).unwrap();
        let back = from_json(&to_json(&inst)).unwrap();
        assert_eq!(back.instance, inst);
        assert!(back.warnings.is_empty());
    }

    #[test]
    fn round_trip_2d() {
        let inst = BumpInstance::from_big_r(2, 14.0).unwrap();
        assert_eq!(from_json(&to_json(&inst)).unwrap().instance, inst);
    }

    #[test]
    fn seventeen_digits() {
        let inst = BumpInstance::from_eps(1, 1e-2, &Default::default()).unwrap();
        let text = to_json(&inst);
        assert!(text.contains("\"R\":3.3333333333333336e1"), "{text}");
    }

    #[test]
    fn missing_key_is_named() {
        let text = r#"{"schema_version":1,"d":1,"r":1.0,"R":10.0,"omega_index":0,"phi":"corrected-footnote-v1"}"#;
        let err = from_json(text).unwrap_err();
        assert!(matches!(&err, InstanceError::Schema(m) if m.contains("centers")), "{err}");
    }

    #[test]
    fn version_mismatch() {
        let text = r#"{"schema_version":7,"d":1,"r":1.0,"R":10.0,"centers":[[0.0]],"omega_index":0,"phi":"corrected-footnote-v1"}"#;
        assert!(matches!(from_json(text), Err(InstanceError::Version { found: 7, .. })));
    }

    #[test]
    fn residual_warning() {
        let text = r#"{"schema_version":1,"d":1,"r":1.0,"R":10.0,"centers":[[0.0]],"omega_index":0,"phi":"corrected-footnote-v1"}"#;
        let rep = from_json(text).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert!(rep.residual > 1e-6);
    }

    #[test]
    fn bad_packing_is_an_error() {
        let text = r#"{"schema_version":1,"d":1,"r":1.0,"R":10.0,"centers":[[0.0],[1.0]],"omega_index":0,"phi":"corrected-footnote-v1"}"#;
        assert!(matches!(from_json(text), Err(InstanceError::Packing(_))));
    }
}
