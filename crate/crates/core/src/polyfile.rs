//! Building polygon files: a GeoJSON `FeatureCollection` of `Polygon`
//! features in region-frame meters, with an optional numeric `height`
//! property. Only the outer ring of each polygon is used.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{Building, Point2, Polygon};

#[derive(Debug, Serialize, Deserialize)]
struct FeatureCollection {
    #[serde(rename = "type")]
    kind: String,
    features: Vec<Feature>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Feature {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    properties: Option<Map<String, Value>>,
    geometry: Geometry,
}

#[derive(Debug, Serialize, Deserialize)]
struct Geometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: Vec<Vec<[f64; 2]>>,
}

/// A footprint as read from a polygon file.
#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub polygon: Polygon,
    pub height: Option<f64>,
}

pub fn parse_footprints(text: &str) -> Result<Vec<Footprint>> {
    let fc: FeatureCollection = serde_json::from_str(text)?;
    if fc.kind != "FeatureCollection" {
        return Err(Error::Config(format!(
            "polygon file: expected FeatureCollection, got {}",
            fc.kind
        )));
    }
    fc.features
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            if f.geometry.kind != "Polygon" {
                return Err(Error::Config(format!(
                    "feature {i}: only Polygon geometries are supported, got {}",
                    f.geometry.kind
                )));
            }
            let ring = f.geometry.coordinates.first().ok_or_else(|| {
                Error::InvalidGeometry(format!("feature {i}: polygon without rings"))
            })?;
            let polygon = Polygon::new(ring.iter().map(|[x, y]| Point2::new(*x, *y)).collect())
                .map_err(|e| Error::InvalidGeometry(format!("feature {i}: {e}")))?;
            let height = match f.properties.as_ref().and_then(|p| p.get("height")) {
                None | Some(Value::Null) => None,
                Some(v) => Some(v.as_f64().ok_or_else(|| {
                    Error::Config(format!("feature {i}: height must be a number"))
                })?),
            };
            Ok(Footprint { polygon, height })
        })
        .collect()
}

pub fn read_footprints(path: &Path) -> Result<Vec<Footprint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_footprints(&text)
}

/// Reads buildings, requiring every feature to carry a height.
pub fn read_buildings(path: &Path) -> Result<Vec<Building>> {
    read_footprints(path)?
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let h = f.height.ok_or_else(|| {
                Error::Config(format!("{}: feature {i} has no height", path.display()))
            })?;
            Building::new(f.polygon, h)
        })
        .collect()
}

pub fn footprints_to_string(polygons: &[Polygon], heights: Option<&[f64]>) -> Result<String> {
    let features = polygons
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut ring: Vec<[f64; 2]> = p.vertices().iter().map(|v| [v.x, v.y]).collect();
            ring.push(ring[0]);
            let mut props = Map::new();
            if let Some(h) = heights.and_then(|h| h.get(i)) {
                props.insert("height".into(), Value::from(*h));
            }
            Feature {
                kind: "Feature".into(),
                properties: Some(props),
                geometry: Geometry {
                    kind: "Polygon".into(),
                    coordinates: vec![ring],
                },
            }
        })
        .collect();
    let fc = FeatureCollection {
        kind: "FeatureCollection".into(),
        features,
    };
    Ok(serde_json::to_string_pretty(&fc)?)
}

pub fn write_footprints(path: &Path, polygons: &[Polygon], heights: Option<&[f64]>) -> Result<()> {
    let text = footprints_to_string(polygons, heights)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn write_buildings(path: &Path, buildings: &[Building]) -> Result<()> {
    let polys: Vec<Polygon> = buildings.iter().map(|b| b.footprint().clone()).collect();
    let heights: Vec<f64> = buildings.iter().map(Building::height).collect();
    write_footprints(path, &polys, Some(&heights))
}
