//! Family fixtures: JSON schema, the embedded corpus and override loading.

use crate::error::{Error, Result};
use crate::exactmath::IntMatrix2xN;
use crate::fano::{Centre, CentreType, Coordinate, FanoFamily, LiftedEquations};
use crate::polyring::{Polynomial, Ring};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateRecord {
    pub name: String,
    pub weight: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentreRecord {
    pub coordinate: String,
    #[serde(rename = "type")]
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingRecord {
    pub columns: Vec<String>,
    pub rows: [Vec<i64>; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presentation {
    pub ambient: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomRecord {
    /// 1-based Tom index.
    pub index: usize,
    pub degrees: Vec<Vec<Option<i64>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallLocus {
    pub wall: String,
    pub contracted: Vec<String>,
    pub extracted: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointEquations {
    pub variables: Vec<String>,
    pub weights: Vec<i64>,
    pub point: String,
    pub mu: Vec<String>,
    pub equations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupWeights {
    pub r: i64,
    pub weights: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlipExpected {
    pub contracted: Vec<i64>,
    pub extracted: Vec<i64>,
    pub k_contracted: String,
    pub k_extracted: String,
}

/// Printed row data a family is checked against.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub table: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centre: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp_degree: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Presentation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_weights: Option<BlowupWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceptional: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip: Option<FlipExpected>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_cone_dim: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyRecord {
    pub id: String,
    pub fano_index: i64,
    pub coordinates: Vec<CoordinateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centre: Option<CentreRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<GradingRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<Presentation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tom: Option<TomRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equations: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_loci: Option<Vec<WallLocus>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_matrix: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_equations: Option<EndpointEquations>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Row {
    pub id: String,
    pub dim_a: usize,
}

impl FamilyRecord {
    pub fn parse(text: &str, origin: &str) -> Result<FamilyRecord> {
        let rec: FamilyRecord = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        rec.family().map_err(|e| Error::Schema(format!("{origin}: {e}")))?;
        Ok(rec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    /// Builds and validates the typed family.
    pub fn family(&self) -> Result<FanoFamily> {
        let centre = match &self.centre {
            None => None,
            Some(c) => {
                let kind = match c.kind.as_str() {
                    "I" => CentreType::I,
                    "II2" => CentreType::II2,
                    k => return Err(Error::Schema(format!("{}: unknown centre type {k}", self.id))),
                };
                Some(Centre { coordinate: c.coordinate.clone(), kind })
            }
        };
        let grading = match &self.grading {
            None => None,
            Some(g) => Some(IntMatrix2xN::new(g.columns.clone(), g.rows[0].clone(), g.rows[1].clone())?),
        };
        let equations = match (&self.equations, &self.grading) {
            (Some(eqs), Some(g)) => {
                let ring = Ring::new(&g.columns);
                let polys = eqs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        ring.parse(s).map_err(|e| Error::Schema(format!("{}: equation {}: {e}", self.id, i + 1)))
                    })
                    .collect::<Result<Vec<Polynomial>>>()?;
                Some(LiftedEquations { ring, polys })
            }
            (Some(_), None) => return Err(Error::Schema(format!("{}: equations need a grading", self.id))),
            _ => None,
        };
        let family = FanoFamily {
            id: self.id.clone(),
            fano_index: self.fano_index,
            coordinates: self.coordinates.iter().map(|c| Coordinate { name: c.name.clone(), weight: c.weight }).collect(),
            centre,
            grading,
            equations,
        };
        family.validate()?;
        Ok(family)
    }
}

macro_rules! embedded {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!("../corpus/families/", $id, ".json")))),*]
    };
}

const EMBEDDED: &[(&str, &str)] = embedded!(
    "39557", "39569", "39576", "39578", "39605", "39607", "39660", "39675", "39676", "39678", "39890", "39898",
    "39906", "39912", "39913", "39928", "39929", "39934", "39961", "39968", "39969", "39970", "39991", "39993",
    "40360", "40370", "40371", "40399", "40400", "40407", "40663", "40671", "40672", "40933",
);

const EMBEDDED_TABLE1: &str = include_str!("../corpus/table1.json");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub families: BTreeMap<String, FamilyRecord>,
    pub table1: Vec<Table1Row>,
}

pub fn parse_table1(text: &str, origin: &str) -> Result<Vec<Table1Row>> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

impl Corpus {
    pub fn embedded() -> Result<Corpus> {
        let mut families = BTreeMap::new();
        for (name, text) in EMBEDDED {
            insert_unique(&mut families, FamilyRecord::parse(text, &format!("families/{name}.json"))?)?;
        }
        Ok(Corpus { families, table1: parse_table1(EMBEDDED_TABLE1, "table1.json")? })
    }

    /// The embedded corpus with records from `path` replacing those with the same id.
    /// `path` is a record file or a directory of them; `table1.json` replaces the Table 1 rows.
    pub fn load(path: Option<&Path>) -> Result<Corpus> {
        let mut corpus = Corpus::embedded()?;
        let Some(path) = path else { return Ok(corpus) };
        let mut files = Vec::new();
        collect_json(path, &mut files)?;
        let mut seen = BTreeMap::new();
        for f in files {
            let origin = f.display().to_string();
            let text = std::fs::read_to_string(&f).map_err(|e| Error::Schema(format!("{origin}: {e}")))?;
            if f.file_name().is_some_and(|n| n == "table1.json") {
                corpus.table1 = parse_table1(&text, &origin)?;
                continue;
            }
            insert_unique(&mut seen, FamilyRecord::parse(&text, &origin)?)?;
        }
        corpus.families.extend(seen);
        Ok(corpus)
    }

    pub fn record(&self, id: &str) -> Option<&FamilyRecord> {
        self.families.get(id).or_else(|| self.families.get(&format!("#{id}")))
    }

    /// Records whose expected row belongs to `table`.
    pub fn table(&self, table: u8) -> Vec<&FamilyRecord> {
        self.families.values().filter(|r| r.expected.as_ref().is_some_and(|e| e.table == table && e.row.is_some())).collect()
    }
}

fn insert_unique(map: &mut BTreeMap<String, FamilyRecord>, rec: FamilyRecord) -> Result<()> {
    if map.contains_key(&rec.id) {
        return Err(Error::Schema(format!("duplicate family id {}", rec.id)));
    }
    map.insert(rec.id.clone(), rec);
    Ok(())
}

fn collect_json(path: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<()> {
    let meta = std::fs::metadata(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    if meta.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<_> = std::fs::read_dir(path)
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_json(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "json") {
            out.push(p);
        }
    }
    Ok(())
}
