use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use arena_core::log::{from_structured, to_structured, GameLog};
use arena_core::tournament::TournamentReport;

/// Finished session games and tournament reports.
///
/// Session games are kept in memory and, when a data directory is configured, written
/// there. Structured log files and report documents found in the data directory (and
/// its immediate subdirectories) are picked up on every listing, so CLI output shows
/// up without a restart.
#[derive(Debug, Default)]
pub struct Store {
    data_dir: Option<PathBuf>,
    sessions: RwLock<BTreeMap<String, GameLog>>,
    reports: RwLock<BTreeMap<String, TournamentReport>>,
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let Ok(entries) = fs::read_dir(dir) else {
        return out;
    };
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for p in paths {
        if p.is_dir() {
            if let Ok(inner) = fs::read_dir(&p) {
                let mut files: Vec<PathBuf> = inner
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "json"))
                    .collect();
                files.sort();
                out.extend(files);
            }
        } else if p.extension().is_some_and(|x| x == "json") {
            out.push(p);
        }
    }
    out
}

impl Store {
    pub fn new(data_dir: Option<PathBuf>) -> Self {
        Store { data_dir, ..Store::default() }
    }

    pub fn add_session_log(&self, id: &str, log: GameLog) {
        if let Some(dir) = &self.data_dir {
            let path = dir.join(format!("session-{id}.json"));
            if let Err(e) =
                fs::create_dir_all(dir).and_then(|_| fs::write(&path, to_structured(std::slice::from_ref(&log))))
            {
                tracing::warn!("could not write {}: {e}", path.display());
            }
        }
        self.sessions.write().unwrap().insert(format!("session-{id}"), log);
    }

    pub fn add_report(&self, report: TournamentReport) {
        self.reports.write().unwrap().insert(report.id.clone(), report);
    }

    /// Every replayable game with its id: `<file stem>.<index>` for files on disk.
    pub fn replays(&self) -> Vec<(String, GameLog)> {
        let mut out: BTreeMap<String, GameLog> = BTreeMap::new();
        if let Some(dir) = &self.data_dir {
            for path in json_files(dir) {
                let Ok(text) = fs::read_to_string(&path) else {
                    continue;
                };
                let Ok(logs) = from_structured(&text) else {
                    continue;
                };
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                if logs.len() == 1 && stem.starts_with("session-") {
                    out.insert(stem, logs.into_iter().next().unwrap());
                } else {
                    for (i, log) in logs.into_iter().enumerate() {
                        out.insert(format!("{stem}.{}", i + 1), log);
                    }
                }
            }
        }
        for (id, log) in self.sessions.read().unwrap().iter() {
            out.insert(id.clone(), log.clone());
        }
        out.into_iter().collect()
    }

    pub fn replay(&self, id: &str) -> Option<GameLog> {
        if let Some(log) = self.sessions.read().unwrap().get(id) {
            return Some(log.clone());
        }
        self.replays().into_iter().find(|(i, _)| i == id).map(|(_, log)| log)
    }

    pub fn reports(&self) -> Vec<TournamentReport> {
        let mut out: BTreeMap<String, TournamentReport> = self.reports.read().unwrap().clone();
        if let Some(dir) = &self.data_dir {
            for path in json_files(dir) {
                let Ok(text) = fs::read_to_string(&path) else {
                    continue;
                };
                if let Ok(report) = TournamentReport::from_document(&text) {
                    out.entry(report.id.clone()).or_insert(report);
                }
            }
        }
        out.into_values().collect()
    }

    pub fn report(&self, id: &str) -> Option<TournamentReport> {
        if let Some(r) = self.reports.read().unwrap().get(id) {
            return Some(r.clone());
        }
        self.reports().into_iter().find(|r| r.id == id)
    }
}
