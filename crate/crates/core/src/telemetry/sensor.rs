use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TelemetryError;

/// Temperature sensor name → hwmon input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, PathBuf>", into = "BTreeMap<String, PathBuf>")]
pub struct SensorMap {
    entries: BTreeMap<String, PathBuf>,
}

impl SensorMap {
    pub fn new(entries: impl IntoIterator<Item = (String, PathBuf)>) -> Result<Self, TelemetryError> {
        let mut map = BTreeMap::new();
        for (name, path) in entries {
            if name.is_empty() || name.contains('/') {
                return Err(TelemetryError::InvalidSensorMap(format!("bad sensor name {name:?}")));
            }
            if path.as_os_str().is_empty() {
                return Err(TelemetryError::InvalidSensorMap(format!("sensor {name} has an empty path")));
            }
            if map.insert(name.clone(), path).is_some() {
                return Err(TelemetryError::InvalidSensorMap(format!("duplicate sensor {name}")));
            }
        }
        Ok(SensorMap { entries: map })
    }

    /// Board defaults: NVMe on hwmon0, motherboard and SoC on hwmon1.
    pub fn board_default() -> Self {
        SensorMap::new([
            ("nvme_temp".to_string(), PathBuf::from("/sys/class/hwmon/hwmon0/temp1_input")),
            ("mb_temp".to_string(), PathBuf::from("/sys/class/hwmon/hwmon1/temp1_input")),
            ("cpu_temp".to_string(), PathBuf::from("/sys/class/hwmon/hwmon1/temp2_input")),
        ])
        .expect("default sensor map is valid")
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Path)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_path()))
    }

    pub fn get(&self, name: &str) -> Option<&Path> {
        self.entries.get(name).map(PathBuf::as_path)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for SensorMap {
    fn default() -> Self {
        SensorMap::board_default()
    }
}

impl TryFrom<BTreeMap<String, PathBuf>> for SensorMap {
    type Error = TelemetryError;

    fn try_from(value: BTreeMap<String, PathBuf>) -> Result<Self, Self::Error> {
        SensorMap::new(value)
    }
}

impl From<SensorMap> for BTreeMap<String, PathBuf> {
    fn from(value: SensorMap) -> Self {
        value.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_board_layout() {
        let m = SensorMap::board_default();
        assert_eq!(m.len(), 3);
        assert_eq!(m.get("cpu_temp").unwrap(), Path::new("/sys/class/hwmon/hwmon1/temp2_input"));
        assert_eq!(m.get("mb_temp").unwrap(), Path::new("/sys/class/hwmon/hwmon1/temp1_input"));
        assert_eq!(m.get("nvme_temp").unwrap(), Path::new("/sys/class/hwmon/hwmon0/temp1_input"));
    }

    #[test]
    fn rejects_duplicates_and_empty_paths() {
        let dup = SensorMap::new([
            ("a".to_string(), PathBuf::from("/x")),
            ("a".to_string(), PathBuf::from("/y")),
        ]);
        assert!(dup.is_err());
        assert!(SensorMap::new([("a".to_string(), PathBuf::new())]).is_err());
    }
}
