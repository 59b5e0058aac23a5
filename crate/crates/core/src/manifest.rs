//! Balanced evaluation manifests.
//!
//! A manifest is a JSONL file, one entry per clip, tying together the source
//! file, an optional processed recording, the label, and the recording setup
//! id. Construction draws a fixed number of clips per (setup, language,
//! architecture) cell without replacement, so every setup sees the same class
//! and language mix: per setup and language there are `n` spoof clips per
//! architecture plus an equal total of bona fide clips.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    Line {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("cell {cell} needs {need} files, pool has {have}")]
    UndersizedCell {
        cell: String,
        need: usize,
        have: usize,
    },
    #[error("pool labeled {label} cannot hold cell {cell}")]
    PoolCellMismatch { label: Label, cell: String },
    #[error("expected a {expected} pool, got {got}")]
    PoolLabel { expected: Label, got: Label },
    #[error("pool file {path}: {detail}")]
    PoolFile { path: String, detail: String },
    #[error("uid list {path}:{line}: duplicate uid `{uid}`")]
    DuplicateUid {
        path: String,
        line: usize,
        uid: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "spoof")]
    Spoof,
    #[serde(rename = "bona fide", alias = "bonafide")]
    BonaFide,
}

impl Label {
    pub fn code(self) -> &'static str {
        match self {
            Label::Spoof => "spoof",
            Label::BonaFide => "bona fide",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spoof" => Ok(Label::Spoof),
            "bona fide" | "bonafide" | "bona_fide" => Ok(Label::BonaFide),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    De,
    Fr,
    It,
    Pl,
    /// Spanish. `sp` is accepted on input as a legacy code.
    #[serde(alias = "sp")]
    Es,
}

pub const ALL_LANGUAGES: [Language; 6] = [
    Language::En,
    Language::De,
    Language::Fr,
    Language::It,
    Language::Pl,
    Language::Es,
];

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::Fr => "fr",
            Language::It => "it",
            Language::Pl => "pl",
            Language::Es => "es",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Language::En),
            "de" => Ok(Language::De),
            "fr" => Ok(Language::Fr),
            "it" => Ok(Language::It),
            "pl" => Ok(Language::Pl),
            "es" | "sp" => Ok(Language::Es),
            other => Err(format!("unknown language `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "bark")]
    Bark,
    #[serde(rename = "vits")]
    Vits,
    #[serde(rename = "xtts_v1.1")]
    XttsV1_1,
    #[serde(rename = "xtts_v2.0")]
    XttsV2_0,
}

pub const ALL_ARCHITECTURES: [Architecture; 4] = [
    Architecture::Bark,
    Architecture::Vits,
    Architecture::XttsV1_1,
    Architecture::XttsV2_0,
];

impl Architecture {
    pub fn code(self) -> &'static str {
        match self {
            Architecture::Bark => "bark",
            Architecture::Vits => "vits",
            Architecture::XttsV1_1 => "xtts_v1.1",
            Architecture::XttsV2_0 => "xtts_v2.0",
        }
    }

    /// Human-facing name for report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Architecture::Bark => "Bark",
            Architecture::Vits => "VITS",
            Architecture::XttsV1_1 => "XTTS v1.1",
            Architecture::XttsV2_0 => "XTTS v2",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bark" => Ok(Architecture::Bark),
            "vits" => Ok(Architecture::Vits),
            "xtts_v1.1" => Ok(Architecture::XttsV1_1),
            "xtts_v2.0" => Ok(Architecture::XttsV2_0),
            other => Err(format!("unknown architecture `{other}`")),
        }
    }
}

/// One clip. `original_file` is the source path, `recorded_file` the
/// processed counterpart (empty until a simulation or recording fills it);
/// both are stored relative to the corpus root. Unknown fields survive a
/// read/write round trip via `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub original_file: String,
    #[serde(default)]
    pub recorded_file: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<Architecture>,
    pub language: Language,
    #[serde(default)]
    pub mic: String,
    #[serde(default)]
    pub speaker: String,
    pub uid: String,
    #[serde(
        rename = "setup.jpg",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub setup_jpg: Option<String>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ManifestEntry {
    /// Identifier score files join on: the recorded path when present,
    /// otherwise the original path.
    pub fn file_id(&self) -> &str {
        if self.recorded_file.is_empty() {
            &self.original_file
        } else {
            &self.recorded_file
        }
    }

    /// Label/architecture consistency problem, if any.
    fn issue(&self) -> Option<String> {
        match (self.label, self.architecture.is_some()) {
            (Label::Spoof, false) => Some(format!(
                "spoof entry `{}` has no architecture",
                self.original_file
            )),
            (Label::BonaFide, true) => Some(format!(
                "bona fide entry `{}` has an architecture",
                self.original_file
            )),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// Seed the manifest was built with, when known.
    pub seed: Option<u64>,
    /// Per-cell draw count the manifest was built with, when known.
    pub n_per_cell: Option<usize>,
}

/// Files available for manifest construction, keyed by cell. Spoof pools are
/// split by (language, architecture); bona fide pools by language only.
#[derive(Debug, Clone)]
pub struct AudioPool {
    label: Label,
    cells: BTreeMap<(Language, Option<Architecture>), Vec<String>>,
}

impl AudioPool {
    pub fn new(label: Label) -> Self {
        Self {
            label,
            cells: BTreeMap::new(),
        }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn add_cell(
        &mut self,
        language: Language,
        architecture: Option<Architecture>,
        files: Vec<String>,
    ) -> Result<(), ManifestError> {
        let arch_matches = match self.label {
            Label::Spoof => architecture.is_some(),
            Label::BonaFide => architecture.is_none(),
        };
        if !arch_matches {
            return Err(ManifestError::PoolCellMismatch {
                label: self.label,
                cell: cell_name(self.label, language, architecture),
            });
        }
        let cell = self.cells.entry((language, architecture)).or_default();
        cell.extend(files);
        cell.sort();
        cell.dedup();
        Ok(())
    }

    pub fn cell(&self, language: Language, architecture: Option<Architecture>) -> &[String] {
        self.cells
            .get(&(language, architecture))
            .map_or(&[], Vec::as_slice)
    }

    pub fn num_files(&self) -> usize {
        self.cells.values().map(Vec::len).sum()
    }
}

fn cell_name(label: Label, language: Language, architecture: Option<Architecture>) -> String {
    match architecture {
        Some(a) => format!("{label}/{language}/{a}"),
        None => format!("{label}/{language}"),
    }
}

/// First `count` elements of a seeded partial Fisher-Yates shuffle, i.e. a
/// uniform draw without replacement.
fn draw_without_replacement(files: &[String], count: usize, seed: u64) -> Vec<String> {
    let mut idx: Vec<usize> = (0..files.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    idx[..count].iter().map(|&i| files[i].clone()).collect()
}

/// Builds a balanced manifest: for every uid and language, `n_per_cell` spoof
/// clips per architecture and the same total of bona fide clips, drawn
/// without replacement with per-cell seeds. Identical inputs give identical
/// manifests regardless of environment.
pub fn build_manifest(
    bona: &AudioPool,
    spoof: &AudioPool,
    uids: &[String],
    n_per_cell: usize,
    seed: u64,
) -> Result<Manifest, ManifestError> {
    if bona.label != Label::BonaFide {
        return Err(ManifestError::PoolLabel {
            expected: Label::BonaFide,
            got: bona.label,
        });
    }
    if spoof.label != Label::Spoof {
        return Err(ManifestError::PoolLabel {
            expected: Label::Spoof,
            got: spoof.label,
        });
    }

    let mut entries =
        Vec::with_capacity(uids.len() * ALL_LANGUAGES.len() * ALL_ARCHITECTURES.len() * 2 * n_per_cell);
    if n_per_cell == 0 {
        return Ok(Manifest {
            entries,
            seed: Some(seed),
            n_per_cell: Some(0),
        });
    }

    for uid in uids {
        for language in ALL_LANGUAGES {
            for architecture in ALL_ARCHITECTURES {
                let files = spoof.cell(language, Some(architecture));
                if files.len() < n_per_cell {
                    return Err(ManifestError::UndersizedCell {
                        cell: cell_name(Label::Spoof, language, Some(architecture)),
                        need: n_per_cell,
                        have: files.len(),
                    });
                }
                let cell_seed = derive_seed(
                    seed,
                    &[uid, language.code(), Label::Spoof.code(), architecture.code()],
                );
                for file in draw_without_replacement(files, n_per_cell, cell_seed) {
                    entries.push(ManifestEntry {
                        original_file: file,
                        recorded_file: String::new(),
                        label: Label::Spoof,
                        architecture: Some(architecture),
                        language,
                        mic: String::new(),
                        speaker: String::new(),
                        uid: uid.clone(),
                        setup_jpg: None,
                        extra: serde_json::Map::new(),
                    });
                }
            }
            // Bona fide clips match the language's spoof total.
            let bona_count = ALL_ARCHITECTURES.len() * n_per_cell;
            let files = bona.cell(language, None);
            if files.len() < bona_count {
                return Err(ManifestError::UndersizedCell {
                    cell: cell_name(Label::BonaFide, language, None),
                    need: bona_count,
                    have: files.len(),
                });
            }
            let cell_seed = derive_seed(seed, &[uid, language.code(), Label::BonaFide.code()]);
            for file in draw_without_replacement(files, bona_count, cell_seed) {
                entries.push(ManifestEntry {
                    original_file: file,
                    recorded_file: String::new(),
                    label: Label::BonaFide,
                    architecture: None,
                    language,
                    mic: String::new(),
                    speaker: String::new(),
                    uid: uid.clone(),
                    setup_jpg: None,
                    extra: serde_json::Map::new(),
                });
            }
        }
    }

    Ok(Manifest {
        entries,
        seed: Some(seed),
        n_per_cell: Some(n_per_cell),
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct UidCounts {
    pub total: usize,
    pub spoof: usize,
    pub bona: usize,
    pub per_language: BTreeMap<Language, usize>,
}

/// One uid whose entry counts break the balance contract.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceViolation {
    pub uid: String,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// Per-cell count the checks ran against (declared or inferred).
    pub n_per_cell: usize,
    pub per_uid: BTreeMap<String, UidCounts>,
    pub per_language: BTreeMap<Language, usize>,
    pub balance_violations: Vec<BalanceViolation>,
    pub entry_issues: Vec<String>,
    pub global_issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.balance_violations.is_empty()
            && self.entry_issues.is_empty()
            && self.global_issues.is_empty()
    }
}

/// Checks per-uid balance (equal spoof/bona counts, even language and
/// architecture coverage) and per-entry label consistency. The expected
/// per-cell count comes from the manifest when recorded, otherwise it is
/// inferred from the average entries per uid.
pub fn validate_manifest(manifest: &Manifest) -> ValidationReport {
    let num_langs = ALL_LANGUAGES.len();
    let num_archs = ALL_ARCHITECTURES.len();
    let cells_per_uid = num_langs * num_archs * 2;

    let mut per_uid: BTreeMap<String, UidCounts> = BTreeMap::new();
    let mut per_language: BTreeMap<Language, usize> = BTreeMap::new();
    let mut spoof_cells: BTreeMap<(String, Language, Architecture), usize> = BTreeMap::new();
    let mut bona_cells: BTreeMap<(String, Language), usize> = BTreeMap::new();
    let mut entry_issues = Vec::new();

    for (i, entry) in manifest.entries.iter().enumerate() {
        if let Some(issue) = entry.issue() {
            entry_issues.push(format!("entry {i}: {issue}"));
        }
        let counts = per_uid.entry(entry.uid.clone()).or_default();
        counts.total += 1;
        *counts.per_language.entry(entry.language).or_default() += 1;
        *per_language.entry(entry.language).or_default() += 1;
        match entry.label {
            Label::Spoof => {
                counts.spoof += 1;
                if let Some(arch) = entry.architecture {
                    *spoof_cells
                        .entry((entry.uid.clone(), entry.language, arch))
                        .or_default() += 1;
                }
            }
            Label::BonaFide => {
                counts.bona += 1;
                *bona_cells
                    .entry((entry.uid.clone(), entry.language))
                    .or_default() += 1;
            }
        }
    }

    let n_per_cell = manifest.n_per_cell.unwrap_or_else(|| {
        if per_uid.is_empty() {
            0
        } else {
            let avg = manifest.entries.len() as f64 / (per_uid.len() * cells_per_uid) as f64;
            avg.round().max(1.0) as usize
        }
    });

    let mut balance_violations = Vec::new();
    for (uid, counts) in &per_uid {
        let mut details = Vec::new();
        let expected_total = cells_per_uid * n_per_cell;
        if counts.total != expected_total {
            details.push(format!(
                "expected {expected_total} entries, found {}",
                counts.total
            ));
        }
        if counts.spoof != counts.bona {
            details.push(format!(
                "spoof/bona imbalance: {} vs {}",
                counts.spoof, counts.bona
            ));
        }
        for language in ALL_LANGUAGES {
            let lang_total = counts.per_language.get(&language).copied().unwrap_or(0);
            let expected_lang = 2 * num_archs * n_per_cell;
            if lang_total != expected_lang {
                details.push(format!(
                    "language {language}: expected {expected_lang} entries, found {lang_total}"
                ));
            }
            let bona_count = bona_cells
                .get(&(uid.clone(), language))
                .copied()
                .unwrap_or(0);
            if bona_count != num_archs * n_per_cell {
                details.push(format!(
                    "cell {}: expected {} entries, found {bona_count}",
                    cell_name(Label::BonaFide, language, None),
                    num_archs * n_per_cell
                ));
            }
            for architecture in ALL_ARCHITECTURES {
                let c = spoof_cells
                    .get(&(uid.clone(), language, architecture))
                    .copied()
                    .unwrap_or(0);
                if c != n_per_cell {
                    details.push(format!(
                        "cell {}: expected {n_per_cell} entries, found {c}",
                        cell_name(Label::Spoof, language, Some(architecture))
                    ));
                }
            }
        }
        if !details.is_empty() {
            balance_violations.push(BalanceViolation {
                uid: uid.clone(),
                details,
            });
        }
    }

    let mut global_issues = Vec::new();
    let total_spoof: usize = per_uid.values().map(|c| c.spoof).sum();
    let total_bona: usize = per_uid.values().map(|c| c.bona).sum();
    if total_spoof != total_bona {
        global_issues.push(format!(
            "global spoof/bona imbalance: {total_spoof} vs {total_bona}"
        ));
    }

    ValidationReport {
        n_per_cell,
        per_uid,
        per_language,
        balance_violations,
        entry_issues,
        global_issues,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_per_cell: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaLine {
    manifest_meta: MetaBody,
}

fn is_meta_line(value: &serde_json::Value) -> bool {
    value.get("manifest_meta").is_some()
}

/// Reads a JSONL manifest. An optional first line
/// `{"manifest_meta":{"seed":...,"n_per_cell":...}}` restores build
/// parameters; every other line is one entry. Blank lines are skipped,
/// malformed lines are reported with their line number.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest, ManifestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ManifestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let reader = BufReader::new(file);

    let mut manifest = Manifest::default();
    let mut seen_content = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ManifestError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| ManifestError::Line {
                path: path.display().to_string(),
                line: line_no,
                detail: e.to_string(),
            })?;
        if is_meta_line(&value) {
            if seen_content {
                return Err(ManifestError::Line {
                    path: path.display().to_string(),
                    line: line_no,
                    detail: "manifest_meta is only allowed on the first line".into(),
                });
            }
            let meta: MetaLine =
                serde_json::from_value(value).map_err(|e| ManifestError::Line {
                    path: path.display().to_string(),
                    line: line_no,
                    detail: e.to_string(),
                })?;
            manifest.seed = meta.manifest_meta.seed;
            manifest.n_per_cell = meta.manifest_meta.n_per_cell;
            seen_content = true;
            continue;
        }
        seen_content = true;
        let entry: ManifestEntry =
            serde_json::from_value(value).map_err(|e| ManifestError::Line {
                path: path.display().to_string(),
                line: line_no,
                detail: e.to_string(),
            })?;
        manifest.entries.push(entry);
    }
    Ok(manifest)
}

/// Writes a manifest as JSONL, one entry per line, streaming. Build
/// parameters, when present, go into a leading `manifest_meta` line.
pub fn write_manifest(manifest: &Manifest, path: impl AsRef<Path>) -> Result<(), ManifestError> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| ManifestError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    if manifest.seed.is_some() || manifest.n_per_cell.is_some() {
        let meta = MetaLine {
            manifest_meta: MetaBody {
                seed: manifest.seed,
                n_per_cell: manifest.n_per_cell,
            },
        };
        serde_json::to_writer(&mut writer, &meta).expect("meta serializes");
        writer.write_all(b"\n").map_err(io_err)?;
    }
    for entry in &manifest.entries {
        serde_json::to_writer(&mut writer, entry).expect("entry serializes");
        writer.write_all(b"\n").map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

#[derive(Debug, Deserialize)]
struct PoolFileSpec {
    #[serde(default)]
    root: Option<String>,
    cells: Vec<PoolCellSpec>,
}

#[derive(Debug, Deserialize)]
struct PoolCellSpec {
    label: Label,
    language: Language,
    #[serde(default)]
    architecture: Option<Architecture>,
    globs: Vec<String>,
}

/// Loads the bona fide and spoof pools described by a JSON pool file.
///
/// The file holds cells with directory globs; matches are resolved against
/// `root` (times the file's optional `root` prefix), deduplicated, sorted,
/// and stored relative to `root`.
pub fn load_pools(
    path: impl AsRef<Path>,
    root: &Path,
) -> Result<(AudioPool, AudioPool), ManifestError> {
    let path = path.as_ref();
    let pool_err = |detail: String| ManifestError::PoolFile {
        path: path.display().to_string(),
        detail,
    };
    let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let spec: PoolFileSpec =
        serde_json::from_str(&text).map_err(|e| pool_err(e.to_string()))?;

    let base = match &spec.root {
        Some(prefix) => root.join(prefix),
        None => root.to_path_buf(),
    };

    let mut bona = AudioPool::new(Label::BonaFide);
    let mut spoof = AudioPool::new(Label::Spoof);
    for cell in &spec.cells {
        let mut files = BTreeSet::new();
        for pattern in &cell.globs {
            let full = base.join(pattern);
            let full = full
                .to_str()
                .ok_or_else(|| pool_err(format!("non-utf8 glob `{}`", full.display())))?
                .to_owned();
            let matches =
                glob::glob(&full).map_err(|e| pool_err(format!("bad glob `{pattern}`: {e}")))?;
            for m in matches {
                let p = m.map_err(|e| pool_err(format!("glob `{pattern}`: {e}")))?;
                if !p.is_file() {
                    continue;
                }
                let rel = p.strip_prefix(root).map_err(|_| {
                    pool_err(format!("matched file {} is outside the root", p.display()))
                })?;
                let rel = rel
                    .to_str()
                    .ok_or_else(|| pool_err(format!("non-utf8 path {}", rel.display())))?;
                files.insert(rel.to_owned());
            }
        }
        let target = match cell.label {
            Label::BonaFide => &mut bona,
            Label::Spoof => &mut spoof,
        };
        target.add_cell(cell.language, cell.architecture, files.into_iter().collect())?;
    }
    Ok((bona, spoof))
}

/// Reads setup uids, one per line; blank lines and `#` comments are skipped.
pub fn read_uids(path: impl AsRef<Path>) -> Result<Vec<String>, ManifestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ManifestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut seen = BTreeSet::new();
    let mut uids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen.insert(line.to_owned()) {
            return Err(ManifestError::DuplicateUid {
                path: path.display().to_string(),
                line: i + 1,
                uid: line.to_owned(),
            });
        }
        uids.push(line.to_owned());
    }
    Ok(uids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn test_pools(files_per_spoof_cell: usize, files_per_bona_cell: usize) -> (AudioPool, AudioPool) {
        let mut bona = AudioPool::new(Label::BonaFide);
        let mut spoof = AudioPool::new(Label::Spoof);
        for language in ALL_LANGUAGES {
            let files = (0..files_per_bona_cell)
                .map(|i| format!("bona/{language}/f{i:04}.wav"))
                .collect();
            bona.add_cell(language, None, files).unwrap();
            for architecture in ALL_ARCHITECTURES {
                let files = (0..files_per_spoof_cell)
                    .map(|i| format!("spoof/{language}/{architecture}/f{i:04}.wav"))
                    .collect();
                spoof.add_cell(language, Some(architecture), files).unwrap();
            }
        }
        (bona, spoof)
    }

    fn uid_list(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("id_{i}")).collect()
    }

    #[test]
    fn full_grid_counts() {
        let (bona, spoof) = test_pools(12, 48);
        let uids = uid_list(109);
        let manifest = build_manifest(&bona, &spoof, &uids, 10, 42).unwrap();
        assert_eq!(manifest.entries.len(), 52_320);
        let per_uid = manifest
            .entries
            .iter()
            .filter(|e| e.uid == "id_0")
            .count();
        assert_eq!(per_uid, 480);
        let per_uid_lang = manifest
            .entries
            .iter()
            .filter(|e| e.uid == "id_0" && e.language == Language::De)
            .count();
        assert_eq!(per_uid_lang, 80);
        let report = validate_manifest(&manifest);
        assert!(report.is_valid(), "{:?}", report.balance_violations);
        assert_eq!(report.per_language[&Language::En], 109 * 80);
    }

    #[test]
    fn deterministic_across_runs() {
        let (bona, spoof) = test_pools(12, 48);
        let uids = uid_list(3);
        let a = build_manifest(&bona, &spoof, &uids, 10, 42).unwrap();
        let b = build_manifest(&bona, &spoof, &uids, 10, 42).unwrap();
        assert_eq!(a, b);
        let c = build_manifest(&bona, &spoof, &uids, 10, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn no_repeats_within_cell() {
        let (bona, spoof) = test_pools(10, 40);
        let uids = uid_list(2);
        let manifest = build_manifest(&bona, &spoof, &uids, 10, 7).unwrap();
        for uid in &uids {
            for language in ALL_LANGUAGES {
                let mut bona_files: Vec<&str> = manifest
                    .entries
                    .iter()
                    .filter(|e| {
                        &e.uid == uid && e.language == language && e.label == Label::BonaFide
                    })
                    .map(|e| e.original_file.as_str())
                    .collect();
                let total = bona_files.len();
                bona_files.sort();
                bona_files.dedup();
                assert_eq!(bona_files.len(), total);
                for architecture in ALL_ARCHITECTURES {
                    let mut files: Vec<&str> = manifest
                        .entries
                        .iter()
                        .filter(|e| {
                            &e.uid == uid
                                && e.language == language
                                && e.architecture == Some(architecture)
                        })
                        .map(|e| e.original_file.as_str())
                        .collect();
                    let total = files.len();
                    files.sort();
                    files.dedup();
                    assert_eq!(files.len(), total);
                }
            }
        }
    }

    #[test]
    fn undersized_cell_names_cell() {
        let (bona, _) = test_pools(12, 48);
        let spoof = {
            let mut fresh = AudioPool::new(Label::Spoof);
            for language in ALL_LANGUAGES {
                for architecture in ALL_ARCHITECTURES {
                    let count = if language == Language::En && architecture == Architecture::Bark {
                        3
                    } else {
                        12
                    };
                    let files = (0..count)
                        .map(|i| format!("spoof/{language}/{architecture}/f{i:04}.wav"))
                        .collect();
                    fresh.add_cell(language, Some(architecture), files).unwrap();
                }
            }
            fresh
        };
        let err = build_manifest(&bona, &spoof, &uid_list(1), 10, 42).unwrap_err();
        match err {
            ManifestError::UndersizedCell { cell, need, have } => {
                assert_eq!(cell, "spoof/en/bark");
                assert_eq!(need, 10);
                assert_eq!(have, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn deleting_one_spoof_entry_flags_exactly_that_uid() {
        let (bona, spoof) = test_pools(12, 48);
        let uids = uid_list(4);
        let mut manifest = build_manifest(&bona, &spoof, &uids, 10, 42).unwrap();
        let victim = manifest
            .entries
            .iter()
            .position(|e| e.uid == "id_2" && e.label == Label::Spoof)
            .unwrap();
        manifest.entries.remove(victim);
        let report = validate_manifest(&manifest);
        assert!(!report.is_valid());
        assert_eq!(report.balance_violations.len(), 1);
        assert_eq!(report.balance_violations[0].uid, "id_2");
        assert!(report.global_issues.len() == 1);
    }

    #[test]
    fn label_architecture_consistency_is_flagged() {
        let (bona, spoof) = test_pools(2, 8);
        let mut manifest = build_manifest(&bona, &spoof, &uid_list(1), 1, 0).unwrap();
        manifest.entries[0].architecture = None;
        let report = validate_manifest(&manifest);
        assert_eq!(report.entry_issues.len(), 1);
        assert!(report.entry_issues[0].contains("no architecture"));
    }

    #[test]
    fn round_trip_preserves_entries_and_meta() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let (bona, spoof) = test_pools(3, 12);
        let mut manifest = build_manifest(&bona, &spoof, &uid_list(2), 2, 9).unwrap();
        manifest.entries[0]
            .extra
            .insert("room".into(), serde_json::json!("kitchen"));
        manifest.entries[1].setup_jpg = Some("setups/id_0.jpg".into());
        write_manifest(&manifest, &path).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back, manifest);
        assert_eq!(back.seed, Some(9));
        assert_eq!(back.n_per_cell, Some(2));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = r#"{"original_file":"a.wav","label":"spoof","architecture":"bark","language":"en","uid":"id_0"}"#;
        std::fs::write(&path, format!("{good}\nnot json\n")).unwrap();
        match read_manifest(&path) {
            Err(ManifestError::Line { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_label_reports_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            r#"{"original_file":"a.wav","language":"en","uid":"id_0"}"#,
        )
        .unwrap();
        match read_manifest(&path) {
            Err(ManifestError::Line { line, detail, .. }) => {
                assert_eq!(line, 1);
                assert!(detail.contains("label"), "{detail}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn legacy_language_code_is_accepted() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sp.jsonl");
        std::fs::write(
            &path,
            r#"{"original_file":"a.wav","label":"bona fide","language":"sp","uid":"id_0"}"#,
        )
        .unwrap();
        let manifest = read_manifest(&path).unwrap();
        assert_eq!(manifest.entries[0].language, Language::Es);
        write_manifest(&manifest, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains(r#""language":"es""#));
    }

    #[test]
    fn unknown_fields_survive_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        std::fs::write(
            &path,
            r#"{"original_file":"a.wav","label":"spoof","architecture":"vits","language":"fr","uid":"id_1","snr_db":22.5}"#,
        )
        .unwrap();
        let manifest = read_manifest(&path).unwrap();
        assert_eq!(
            manifest.entries[0].extra.get("snr_db"),
            Some(&serde_json::json!(22.5))
        );
        write_manifest(&manifest, &path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().contains("snr_db"));
    }

    /// A full-size manifest streams through write and read quickly.
    #[test]
    fn full_size_round_trip_is_fast() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("big.jsonl");
        let (bona, spoof) = test_pools(12, 48);
        let manifest = build_manifest(&bona, &spoof, &uid_list(109), 10, 1).unwrap();
        let start = std::time::Instant::now();
        write_manifest(&manifest, &path).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(back.entries.len(), 52_320);
        assert!(start.elapsed().as_secs() < 30);
    }

    #[test]
    fn pool_file_globs_resolve_relative_to_root() {
        let dir = tempdir().unwrap();
        let root = dir.path();
        for (sub, name) in [
            ("bona/en", "b0.wav"),
            ("bona/en", "b1.wav"),
            ("spoof/en/bark", "s0.wav"),
        ] {
            let d = root.join(sub);
            std::fs::create_dir_all(&d).unwrap();
            std::fs::write(d.join(name), b"").unwrap();
        }
        let pool_path = root.join("pools.json");
        std::fs::write(
            &pool_path,
            r#"{
              "cells": [
                {"label": "bona fide", "language": "en", "globs": ["bona/en/*.wav"]},
                {"label": "spoof", "language": "en", "architecture": "bark", "globs": ["spoof/en/**/*.wav"]}
              ]
            }"#,
        )
        .unwrap();
        let (bona, spoof) = load_pools(&pool_path, root).unwrap();
        assert_eq!(
            bona.cell(Language::En, None),
            ["bona/en/b0.wav", "bona/en/b1.wav"]
        );
        assert_eq!(
            spoof.cell(Language::En, Some(Architecture::Bark)),
            ["spoof/en/bark/s0.wav"]
        );
    }

    #[test]
    fn uid_file_rejects_duplicates() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("uids.txt");
        std::fs::write(&path, "# setups\nid_0\nid_1\n\nid_0\n").unwrap();
        match read_uids(&path) {
            Err(ManifestError::DuplicateUid { line, uid, .. }) => {
                assert_eq!(line, 5);
                assert_eq!(uid, "id_0");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
