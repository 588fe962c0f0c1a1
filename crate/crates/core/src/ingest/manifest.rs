use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Subject id to group label, read from a two-column `subject_id,group` CSV.
pub type Manifest = BTreeMap<String, String>;

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text).map_err(|e| match e {
        Error::Schema(msg) => Error::format(path, msg),
        other => other,
    })
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Schema(e.to_string()))?;
    if header.len() != 2 || &header[0] != "subject_id" || &header[1] != "group" {
        return Err(Error::Schema(
            "manifest header must be `subject_id,group`".to_string(),
        ));
    }
    let mut out = Manifest::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Schema(e.to_string()))?;
        let subject = record[0].to_string();
        if out.insert(subject.clone(), record[1].to_string()).is_some() {
            return Err(Error::Schema(format!("duplicate subject {subject:?} in manifest")));
        }
    }
    Ok(out)
}

pub fn manifest_to_csv(manifest: &Manifest) -> String {
    let mut out = String::from("subject_id,group\n");
    for (s, g) in manifest {
        out.push_str(&format!("{s},{g}\n"));
    }
    out
}
