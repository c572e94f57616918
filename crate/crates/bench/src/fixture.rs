//! Seeded synthetic Erasmus mobility data.
//!
//! Each record is one student exchange with the columns of the published
//! sample (from/to institution, their countries, subject area, academic year,
//! distance in km and compass direction). Records become `mobility` edge
//! documents between `HE` nodes; institutions, countries, subjects and years
//! become node documents, deduplicated by id.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const BASE: &str = "http://localhost:8000/schemas/";

/// Source column → edge document member.
pub const COLUMNS: [(&str, &str); 8] = [
    ("from he", "source"),
    ("from he country", "from_he_country"),
    ("to he", "target"),
    ("to he country", "to_he_country"),
    ("subject", "subject"),
    ("year", "year"),
    ("distance", "distance"),
    ("direction", "direction"),
];

/// Node descriptors in registration order, then the edge descriptor.
pub const NODE_TITLES: [&str; 5] = ["institute", "HE", "country", "subject", "year"];
pub const EDGE_TITLE: &str = "mobility";

/// (Erasmus institution prefix, country id, country name)
const COUNTRIES: [(&str, &str, &str); 16] = [
    ("A", "AT", "Austria"),
    ("B", "BE", "Belgium"),
    ("CZ", "CZ", "Czech Republic"),
    ("D", "DE", "Germany"),
    ("DK", "DK", "Denmark"),
    ("E", "ES", "Spain"),
    ("F", "FR", "France"),
    ("FI", "FI", "Finland"),
    ("HU", "HU", "Hungary"),
    ("I", "IT", "Italy"),
    ("K", "UK", "United Kingdom"),
    ("NL", "NL", "Netherlands"),
    ("PL", "PL", "Poland"),
    ("P", "PT", "Portugal"),
    ("S", "SE", "Sweden"),
    ("TR", "TR", "Turkey"),
];

const CITIES: [&str; 24] = [
    "AACHEN", "BARCELO", "BOLOGNA", "BUDAPES", "COIMBRA", "DELFT", "GENT", "GRANADA", "HELSINK",
    "KRAKOW", "LEUVEN", "LILLE", "LUND", "LYON", "MADRID", "MUNCHEN", "PADOVA", "PRAHA", "SEVILLA",
    "TORINO", "TURKU", "VESZPRE", "WIEN", "ZARAGOZ",
];

const YEARS: [&str; 6] = [
    "2008-09", "2009-10", "2010-11", "2011-12", "2012-13", "2013-14",
];

/// Broad subject areas, keyed by their one-digit code.
const SUBJECTS: [&str; 9] = [
    "General programmes",
    "Education",
    "Humanities and arts",
    "Social sciences, business and law",
    "Science, mathematics and computing",
    "Engineering, manufacturing and construction",
    "Agriculture and veterinary",
    "Health and welfare",
    "Services",
];

/// One row of mobility data.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub from_he: String,
    pub from_he_country: String,
    pub to_he: String,
    pub to_he_country: String,
    pub subject: String,
    pub year: String,
    pub distance: u32,
    pub direction: f64,
}

/// The two sample rows of the published table.
pub fn sample_records() -> [Record; 2] {
    [
        Record {
            from_he: "D  KONSTAN01".into(),
            from_he_country: "DE".into(),
            to_he: "K BATH01".into(),
            to_he_country: "UK".into(),
            subject: "3".into(),
            year: "2008-09".into(),
            distance: 907,
            direction: 296.286297877918,
        },
        Record {
            from_he: "D  KONSTAN01".into(),
            from_he_country: "DE".into(),
            to_he: "F  PARIS007".into(),
            to_he_country: "FR".into(),
            subject: "4".into(),
            year: "2008-09".into(),
            distance: 501,
            direction: 283.942344291399,
        },
    ]
}

/// Erasmus institution codes pad the country prefix to three characters.
fn institution_code(prefix: &str, city: &str, number: u32) -> String {
    format!("{prefix:<3}{city}{number:02}")
}

fn title_case(word: &str) -> String {
    let lower = word.to_lowercase();
    let mut chars = lower.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Institution {
    code: String,
    country: String,
    name: String,
}

fn institution_pool(rng: &mut ChaCha8Rng, size: usize) -> Vec<Institution> {
    let mut pool = vec![
        Institution {
            code: "D  KONSTAN01".into(),
            country: "DE".into(),
            name: "Konstanz".into(),
        },
        Institution {
            code: "K BATH01".into(),
            country: "UK".into(),
            name: "Bath".into(),
        },
        Institution {
            code: "F  PARIS007".into(),
            country: "FR".into(),
            name: "Paris".into(),
        },
    ];
    let mut seen: std::collections::BTreeSet<String> =
        pool.iter().map(|i| i.code.clone()).collect();
    while pool.len() < size {
        let (prefix, country, _) = *COUNTRIES.choose(rng).expect("non-empty");
        let city = *CITIES.choose(rng).expect("non-empty");
        let code = institution_code(prefix, city, rng.random_range(1..=20));
        if seen.insert(code.clone()) {
            pool.push(Institution {
                code,
                country: country.to_string(),
                name: title_case(city),
            });
        }
    }
    pool
}

/// `n` records; the first two (when `n >= 2`) are the published sample rows.
pub fn records(n: usize, seed: u64) -> Vec<Record> {
    records_with_pool(n, seed).0
}

fn records_with_pool(n: usize, seed: u64) -> (Vec<Record>, Vec<Institution>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = institution_pool(&mut rng, 150);
    let mut out: Vec<Record> = sample_records().into_iter().take(n).collect();
    while out.len() < n {
        let from = pool.choose(&mut rng).expect("non-empty");
        let to = loop {
            let candidate = pool.choose(&mut rng).expect("non-empty");
            if candidate.code != from.code {
                break candidate;
            }
        };
        out.push(Record {
            from_he: from.code.clone(),
            from_he_country: from.country.clone(),
            to_he: to.code.clone(),
            to_he_country: to.country.clone(),
            subject: rng.random_range(0..SUBJECTS.len()).to_string(),
            year: YEARS.choose(&mut rng).expect("non-empty").to_string(),
            distance: rng.random_range(40..3500),
            direction: (rng.random_range(0.0..360.0f64) * 1e12).round() / 1e12,
        });
    }
    (out, pool)
}

fn descriptor(title: &str, file: &str, extra: Value) -> Value {
    let mut doc = json!({
        "$schema": format!("{BASE}validators/node_validator.json#"),
        "id": format!("{BASE}ranking/{file}#"),
        "title": title,
        "type": "object",
        "properties": {
            "id": {"$ref": "../basic/basic_definitions.json#/definitions/id"},
            "name": {"type": "string", "maxLength": 1000, "minLength": 1}
        },
        "additionalProperties": {"$ref": "../basic/basic_definitions.json#/definitions/default_property"},
        "required": ["id", "name"],
        "graph_element": "node"
    });
    if let (Value::Object(doc), Value::Object(extra)) = (&mut doc, extra) {
        for (k, v) in extra {
            doc.insert(k, v);
        }
    }
    doc
}

/// Descriptor documents in registration order: (file name, document).
pub fn descriptors() -> Vec<(String, Value)> {
    let mut he = descriptor("HE", "he.json", json!({"parents": ["institute"]}));
    he["properties"]["country"] = json!({"type": "string", "minLength": 2, "maxLength": 2});
    let mut mobility = descriptor(
        EDGE_TITLE,
        "mobility.json",
        json!({
            "$schema": format!("{BASE}validators/edge_validator.json#"),
            "graph_element": "edge",
            "direction": "single",
            "source_label": "./he.json#",
            "target_label": "./he.json#",
            "required": ["id", "name", "source", "target"]
        }),
    );
    let props = mobility["properties"].as_object_mut().expect("object");
    for (member, schema) in [
        (
            "source",
            json!({"$ref": "../basic/basic_definitions.json#/definitions/id"}),
        ),
        (
            "target",
            json!({"$ref": "../basic/basic_definitions.json#/definitions/id"}),
        ),
        ("from_he_country", json!({"type": "string"})),
        ("to_he_country", json!({"type": "string"})),
        ("subject", json!({"type": "string"})),
        (
            "year",
            json!({"type": "string", "pattern": "^[0-9]{4}-[0-9]{2}$"}),
        ),
        ("distance", json!({"type": "integer", "minimum": 0})),
        (
            "direction",
            json!({"type": "number", "minimum": 0, "maximum": 360, "exclusiveMaximum": true}),
        ),
    ] {
        props.insert(member.to_string(), schema);
    }
    vec![
        (
            "institute.json".into(),
            descriptor("institute", "institute.json", json!({})),
        ),
        ("he.json".into(), he),
        (
            "country.json".into(),
            descriptor("country", "country.json", json!({})),
        ),
        (
            "subject.json".into(),
            descriptor("subject", "subject.json", json!({})),
        ),
        (
            "year.json".into(),
            descriptor("year", "year.json", json!({})),
        ),
        ("mobility.json".into(), mobility),
    ]
}

/// Descriptors, node documents per title and edge documents.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub n: usize,
    pub seed: u64,
    pub descriptors: Vec<(String, Value)>,
    /// title → documents, deduplicated and sorted by id
    pub nodes: BTreeMap<String, Vec<Value>>,
    pub edges: Vec<Value>,
}

pub fn edge_document(index: usize, r: &Record) -> Value {
    let id = format!("m{:06}", index + 1);
    json!({
        "id": id,
        "name": format!("mobility {}", index + 1),
        "source": r.from_he,
        "from_he_country": r.from_he_country,
        "target": r.to_he,
        "to_he_country": r.to_he_country,
        "subject": r.subject,
        "year": r.year,
        "distance": r.distance,
        "direction": r.direction
    })
}

pub fn generate(n: usize, seed: u64) -> Fixture {
    let (records, pool) = records_with_pool(n, seed);
    let mut he: BTreeMap<String, Value> = BTreeMap::new();
    let mut country: BTreeMap<String, Value> = BTreeMap::new();
    let mut subject: BTreeMap<String, Value> = BTreeMap::new();
    let mut year: BTreeMap<String, Value> = BTreeMap::new();
    let names: BTreeMap<&str, &str> = COUNTRIES.iter().map(|(_, id, name)| (*id, *name)).collect();
    let pool_names: BTreeMap<String, String> = pool.into_iter().map(|i| (i.code, i.name)).collect();
    for r in &records {
        for (code, c) in [
            (&r.from_he, &r.from_he_country),
            (&r.to_he, &r.to_he_country),
        ] {
            he.entry(code.clone()).or_insert_with(|| {
                json!({"id": code, "name": pool_names.get(code).cloned().unwrap_or_else(|| code.clone()), "country": c})
            });
            country.entry(c.clone()).or_insert_with(
                || json!({"id": c, "name": names.get(c.as_str()).copied().unwrap_or(c)}),
            );
        }
        let area = SUBJECTS[r.subject.parse::<usize>().unwrap_or(0) % SUBJECTS.len()];
        subject
            .entry(r.subject.clone())
            .or_insert_with(|| json!({"id": r.subject, "name": area}));
        year.entry(r.year.clone())
            .or_insert_with(|| json!({"id": r.year, "name": format!("academic year {}", r.year)}));
    }
    let nodes = [
        ("HE", he),
        ("country", country),
        ("subject", subject),
        ("year", year),
    ]
    .into_iter()
    .map(|(t, docs)| (t.to_string(), docs.into_values().collect()))
    .collect();
    Fixture {
        n,
        seed,
        descriptors: descriptors(),
        nodes,
        edges: records
            .iter()
            .enumerate()
            .map(|(i, r)| edge_document(i, r))
            .collect(),
    }
}

impl Fixture {
    /// Relative path → file contents, in a fixed order.
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let pretty = |v: &Value| {
            let mut bytes = serde_json::to_vec_pretty(v).expect("serializable");
            bytes.push(b'\n');
            bytes
        };
        let mut files = Vec::new();
        for (name, doc) in &self.descriptors {
            files.push((format!("descriptors/{name}"), pretty(doc)));
        }
        for (title, docs) in &self.nodes {
            files.push((
                format!("data/{title}.json"),
                pretty(&Value::Array(docs.clone())),
            ));
        }
        files.push((
            format!("data/{EDGE_TITLE}.json"),
            pretty(&Value::Array(self.edges.clone())),
        ));
        files.push(("records.csv".into(), self.records_csv()));
        files
    }

    /// The edge documents as a table with the source column headers.
    pub fn records_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS.iter().map(|(column, _)| *column))
            .expect("in-memory write");
        for edge in &self.edges {
            let row: Vec<String> = COLUMNS
                .iter()
                .map(|(_, member)| match &edge[*member] {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            w.write_record(&row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<Vec<String>> {
        let mut written = Vec::new();
        for (rel, bytes) in self.files() {
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, bytes)?;
            written.push(rel);
        }
        Ok(written)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.values().map(Vec::len).sum()
    }
}
