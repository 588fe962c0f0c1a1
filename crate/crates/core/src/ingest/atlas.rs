use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::table::TimeSeriesTable;

/// Network names and node counts of the 160-ROI Dosenbach atlas.
pub const DOSENBACH_NETWORKS: [(&str, usize); 6] = [
    ("CB", 18),
    ("CO", 32),
    ("DMN", 34),
    ("FP", 21),
    ("OP", 22),
    ("SM", 33),
];

/// Mapping from network name to its ordered channel names.
///
/// JSON form is a plain object: `{"DMN": ["DMN_01", ...], ...}`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct NetworkAtlas {
    pub networks: BTreeMap<String, Vec<String>>,
}

impl NetworkAtlas {
    pub fn new(networks: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let atlas = Self { networks };
        atlas.validate()?;
        Ok(atlas)
    }

    /// Atlas with `sizes[i]` channels named `<network>_<k>` (k 1-based, zero padded).
    pub fn with_generated_names(sizes: &[(&str, usize)]) -> Self {
        let networks = sizes
            .iter()
            .map(|&(name, count)| {
                let channels = (1..=count).map(|k| format!("{name}_{k:02}")).collect();
                (name.to_string(), channels)
            })
            .collect();
        Self { networks }
    }

    /// Default six-network layout with 160 generated channel names.
    pub fn dosenbach() -> Self {
        Self::with_generated_names(&DOSENBACH_NETWORKS)
    }

    /// Compact two-network layout used by the synthetic cohorts.
    pub fn synthetic() -> Self {
        Self::with_generated_names(&[("N1", 6), ("N2", 6)])
    }

    pub fn network(&self, name: &str) -> Result<&[String]> {
        self.networks
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownNetwork(name.to_string()))
    }

    pub fn network_names(&self) -> impl Iterator<Item = &str> {
        self.networks.keys().map(String::as_str)
    }

    /// All channels, network by network.
    pub fn all_channels(&self) -> Vec<String> {
        self.networks.values().flatten().cloned().collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, channels) in &self.networks {
            if channels.is_empty() {
                return Err(Error::Schema(format!("network {name:?} has no channels")));
            }
            let mut seen = HashSet::new();
            for c in channels {
                if !seen.insert(c) {
                    return Err(Error::Schema(format!(
                        "network {name:?} lists channel {c:?} twice"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Check that every atlas channel exists in `table`.
    pub fn check_table(&self, table: &TimeSeriesTable) -> Result<()> {
        for (network, channels) in &self.networks {
            for c in channels {
                if table.channel_index(c).is_none() {
                    return Err(Error::MissingChannel {
                        network: network.clone(),
                        channel: c.clone(),
                        table: table.subject_id().to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("atlas serialization cannot fail")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let atlas = Self::from_json(&text).map_err(|e| Error::format(path, e))?;
        atlas.validate()?;
        Ok(atlas)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Restrict `table` to one network's channels, in atlas order.
pub fn slice_network(
    table: &TimeSeriesTable,
    atlas: &NetworkAtlas,
    network: &str,
) -> Result<TimeSeriesTable> {
    let channels = atlas.network(network)?;
    if let Some(missing) = channels.iter().find(|c| table.channel_index(c).is_none()) {
        return Err(Error::MissingChannel {
            network: network.to_string(),
            channel: missing.clone(),
            table: table.subject_id().to_string(),
        });
    }
    table.select(channels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_table(atlas: &NetworkAtlas) -> TimeSeriesTable {
        let names = atlas.all_channels();
        let rows = (0..4)
            .map(|t| (0..names.len()).map(|c| (t * 1000 + c) as f64).collect())
            .collect();
        TimeSeriesTable::new("s1", names, rows).unwrap()
    }

    #[test]
    fn dosenbach_partitions_160_channels() {
        let atlas = NetworkAtlas::dosenbach();
        let all = atlas.all_channels();
        assert_eq!(all.len(), 160);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 160);
        let table = full_table(&atlas);
        for (name, count) in DOSENBACH_NETWORKS {
            let s = slice_network(&table, &atlas, name).unwrap();
            assert_eq!(s.channels(), count, "{name}");
        }
    }

    #[test]
    fn dmn_slice_has_34_columns_in_atlas_order() {
        let atlas = NetworkAtlas::dosenbach();
        let table = full_table(&atlas);
        let s = slice_network(&table, &atlas, "DMN").unwrap();
        assert_eq!(s.channels(), 34);
        assert_eq!(s.channel_names(), atlas.network("DMN").unwrap());
    }

    #[test]
    fn unknown_network() {
        let atlas = NetworkAtlas::dosenbach();
        let table = full_table(&atlas);
        assert!(matches!(
            slice_network(&table, &atlas, "XX"),
            Err(Error::UnknownNetwork(_))
        ));
    }

    #[test]
    fn missing_channel() {
        let atlas = NetworkAtlas::dosenbach();
        let table = TimeSeriesTable::new(
            "s",
            vec!["CB_01".into()],
            vec![vec![1.0], vec![2.0], vec![3.0]],
        )
        .unwrap();
        assert!(matches!(
            slice_network(&table, &atlas, "CB"),
            Err(Error::MissingChannel { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let atlas = NetworkAtlas::synthetic();
        let back = NetworkAtlas::from_json(&atlas.to_json()).unwrap();
        assert_eq!(atlas, back);
        let parsed = NetworkAtlas::from_json(r#"{"X": ["a", "b"]}"#).unwrap();
        assert_eq!(parsed.network("X").unwrap(), &["a".to_string(), "b".to_string()]);
    }
}
