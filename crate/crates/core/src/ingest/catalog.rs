use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::csvio;
use super::{IngestError, Region};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct City {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    /// Relative population weight used for regional averages.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CityRow {
    region: Region,
    city: String,
    lat: f64,
    lon: f64,
    weight: f64,
}

/// Cities whose weather represents each region, in feature order.
#[derive(Debug, Clone, PartialEq)]
pub struct CityCatalog {
    regions: BTreeMap<Region, Vec<City>>,
}

// Largest cities per grid region; weights are metro populations in millions.
const DEFAULT_CITIES: &[(Region, &str, f64, f64, f64)] = &[
    (Region::NR, "Delhi", 28.61, 77.21, 28.5),
    (Region::NR, "Jaipur", 26.91, 75.79, 3.9),
    (Region::NR, "Lucknow", 26.85, 80.95, 3.4),
    (Region::NR, "Kanpur", 26.45, 80.33, 3.0),
    (Region::NR, "Ghaziabad", 28.67, 77.45, 2.4),
    (Region::NR, "Ludhiana", 30.90, 75.86, 1.7),
    (Region::NR, "Agra", 27.18, 78.01, 2.0),
    (Region::WR, "Mumbai", 19.08, 72.88, 20.0),
    (Region::WR, "Ahmadabad", 23.02, 72.57, 7.7),
    (Region::WR, "Surat", 21.17, 72.83, 6.6),
    (Region::WR, "Pune", 18.52, 73.86, 6.3),
    (Region::WR, "Nagpur", 21.15, 79.09, 2.6),
    (Region::WR, "Thane", 19.22, 72.98, 1.9),
    (Region::WR, "Bhopal", 23.26, 77.41, 2.2),
    (Region::WR, "Indore", 22.72, 75.86, 2.6),
    (Region::WR, "Pimpri-Chinchwad", 18.63, 73.80, 1.7),
    (Region::ER, "Kolkata", 22.57, 88.36, 14.7),
    (Region::ER, "Patna", 25.59, 85.14, 2.3),
    (Region::ER, "Ranchi", 23.34, 85.31, 1.5),
    (Region::SR, "Hyderabad", 17.39, 78.49, 9.5),
    (Region::SR, "Bangalore", 12.97, 77.59, 11.4),
    (Region::SR, "Chennai", 13.08, 80.27, 10.5),
    (Region::SR, "Visakhapatnam", 17.69, 83.22, 2.1),
    (Region::SR, "Coimbatore", 11.02, 76.96, 2.6),
    (Region::SR, "Vijayawada", 16.51, 80.65, 1.8),
    (Region::SR, "Madurai", 9.93, 78.12, 1.6),
    (Region::NER, "Guwahati", 26.14, 91.74, 1.1),
    (Region::NER, "Agartala", 23.83, 91.29, 0.5),
    (Region::NER, "Imphal", 24.82, 93.94, 0.6),
];

impl Default for CityCatalog {
    fn default() -> Self {
        let mut regions: BTreeMap<Region, Vec<City>> = BTreeMap::new();
        for &(region, name, lat, lon, weight) in DEFAULT_CITIES {
            regions.entry(region).or_default().push(City { name: name.into(), lat, lon, weight });
        }
        CityCatalog { regions }
    }
}

impl CityCatalog {
    pub fn new(regions: BTreeMap<Region, Vec<City>>) -> Self {
        CityCatalog { regions }
    }

    pub fn cities(&self, region: Region) -> &[City] {
        self.regions.get(&region).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_cities(&self) -> impl Iterator<Item = (Region, &City)> {
        self.regions.iter().flat_map(|(r, cs)| cs.iter().map(move |c| (*r, c)))
    }

    pub fn region_of(&self, city: &str) -> Option<Region> {
        self.all_cities().find(|(_, c)| c.name == city).map(|(r, _)| r)
    }

    /// Differences from the stock per-region city lists, empty when identical.
    pub fn differences_from_default(&self) -> Vec<String> {
        let reference = CityCatalog::default();
        let mut issues = Vec::new();
        for region in Region::ALL {
            let ours: Vec<&str> = self.cities(region).iter().map(|c| c.name.as_str()).collect();
            let theirs: Vec<&str> = reference.cities(region).iter().map(|c| c.name.as_str()).collect();
            for name in theirs.iter().filter(|n| !ours.contains(n)) {
                issues.push(format!("{region}: missing city {name}"));
            }
            for name in ours.iter().filter(|n| !theirs.contains(n)) {
                issues.push(format!("{region}: unexpected city {name}"));
            }
        }
        issues
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let rows: Vec<(u64, CityRow)> = csvio::read_table(path, &["region", "city", "lat", "lon", "weight"])?;
        let file = csvio::file_label(path);
        let mut regions: BTreeMap<Region, Vec<City>> = BTreeMap::new();
        let mut seen = std::collections::HashSet::new();
        for (line, row) in rows {
            if row.weight <= 0.0 {
                return Err(IngestError::NonPositiveValue { file, row: line, column: "weight".into(), value: row.weight });
            }
            if !seen.insert(row.city.clone()) {
                return Err(IngestError::Invalid { file, row: line, message: format!("city {} listed twice", row.city) });
            }
            regions.entry(row.region).or_default().push(City { name: row.city, lat: row.lat, lon: row.lon, weight: row.weight });
        }
        Ok(CityCatalog { regions })
    }

    pub fn write(&self, path: &Path) -> Result<(), IngestError> {
        let rows: Vec<CityRow> = self
            .all_cities()
            .map(|(region, c)| CityRow { region, city: c.name.clone(), lat: c.lat, lon: c.lon, weight: c.weight })
            .collect();
        csvio::write_table(path, &rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StateRow {
    state: String,
    region: Region,
}

/// Assignment of every state to exactly one region.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateMap {
    states: BTreeMap<String, Region>,
}

impl StateMap {
    pub fn new(entries: impl IntoIterator<Item = (String, Region)>) -> Self {
        StateMap { states: entries.into_iter().collect() }
    }

    pub fn region_of(&self, state: &str) -> Option<Region> {
        self.states.get(state).copied()
    }

    /// States of `region` in code order.
    pub fn states_in(&self, region: Region) -> Vec<&str> {
        self.states.iter().filter(|(_, r)| **r == region).map(|(s, _)| s.as_str()).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = (&str, Region)> {
        self.states.iter().map(|(s, r)| (s.as_str(), *r))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let rows: Vec<(u64, StateRow)> = csvio::read_table(path, &["state", "region"])?;
        let file = csvio::file_label(path);
        let mut states = BTreeMap::new();
        for (line, row) in rows {
            let code = row.state.trim().to_string();
            if code == "IN" || code.parse::<Region>().is_ok() {
                return Err(IngestError::Invalid {
                    file,
                    row: line,
                    message: format!("state code {code} collides with a region or national code"),
                });
            }
            if states.insert(code.clone(), row.region).is_some() {
                return Err(IngestError::Invalid { file, row: line, message: format!("state {code} listed twice") });
            }
        }
        Ok(StateMap { states })
    }

    pub fn write(&self, path: &Path) -> Result<(), IngestError> {
        let rows: Vec<StateRow> =
            self.states.iter().map(|(s, r)| StateRow { state: s.clone(), region: *r }).collect();
        csvio::write_table(path, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_catalog_sizes() {
        let cat = CityCatalog::default();
        let sizes: Vec<usize> = Region::ALL.iter().map(|r| cat.cities(*r).len()).collect();
        assert_eq!(sizes, vec![7, 9, 3, 7, 3]);
        assert!(cat.differences_from_default().is_empty());
        // Howrah is folded into Kolkata
        assert_eq!(cat.region_of("Howrah"), None);
        assert_eq!(cat.region_of("Kolkata"), Some(Region::ER));
    }

    #[test]
    fn catalog_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cities.csv");
        let cat = CityCatalog::default();
        cat.write(&path).unwrap();
        assert_eq!(CityCatalog::load(&path).unwrap(), cat);
    }

    #[test]
    fn state_codes_may_not_shadow_regions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("states.csv");
        std::fs::write(&path, "state,region\nSR,SR\n").unwrap();
        assert!(StateMap::load(&path).is_err());
        std::fs::write(&path, "state,region\nTN,SR\nKA,SR\nDL,NR\n").unwrap();
        let map = StateMap::load(&path).unwrap();
        assert_eq!(map.states_in(Region::SR), vec!["KA", "TN"]);
        assert_eq!(map.region_of("DL"), Some(Region::NR));
    }
}
