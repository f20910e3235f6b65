//! Images and jobs, in memory with optional directory-backed persistence.
//!
//! Layout under the data directory:
//! `images/<sha256>` holds uploaded bytes, `jobs/<id>.json` a job record and
//! `jobs/<id>/{mask.png,spline.json,trace.csv}` its results.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use strokeforge::energy::{EnergyBreakdown, EnergyParams};
use strokeforge::image_io::{decode_gray, GrayImage, StretchRange};
use strokeforge::optimizer::DescentConfig;
use strokeforge::pipeline::{restore_with, RestoreConfig, SamplePoint, SamplePointSet};
use tokio::sync::watch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }
}

fn default_stretch() -> Option<[f64; 2]> {
    Some([1.0, 99.0])
}

/// Restoration parameters; every field is optional in requests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JobParams {
    pub energy: EnergyParams,
    pub descent: DescentConfig,
    /// Histogram-stretch percentiles; `null` skips stretching.
    #[serde(default = "default_stretch")]
    pub stretch: Option<[f64; 2]>,
    pub invert: bool,
}

impl Default for JobParams {
    fn default() -> Self {
        Self {
            energy: EnergyParams::default(),
            descent: DescentConfig::default(),
            stretch: default_stretch(),
            invert: false,
        }
    }
}

impl JobParams {
    pub fn validate(&self) -> strokeforge::Result<()> {
        self.energy.validate()?;
        self.descent.validate()?;
        if let Some([lo, hi]) = self.stretch {
            StretchRange::new(lo, hi)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: usize,
    pub energy: EnergyBreakdown,
    pub spline: Box<RawValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub image_id: String,
    pub points: Vec<SamplePoint>,
    pub params: JobParams,
    pub status: JobStatus,
    pub snapshots: Vec<Snapshot>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct JobResults {
    pub mask_png: Vec<u8>,
    pub spline_json: String,
    pub trace_csv: String,
}

pub struct Job {
    record: RwLock<JobRecord>,
    results: RwLock<Option<Arc<JobResults>>>,
    /// Bumped after every record change.
    progress: watch::Sender<u64>,
}

impl Job {
    fn new(record: JobRecord, results: Option<JobResults>) -> Self {
        Self {
            record: RwLock::new(record),
            results: RwLock::new(results.map(Arc::new)),
            progress: watch::channel(0).0,
        }
    }

    pub fn record(&self) -> JobRecord {
        self.record.read().expect("job lock").clone()
    }

    /// Snapshot `index` if it exists, else the status.
    pub fn snapshot_or_status(&self, index: usize) -> Result<Snapshot, (JobStatus, Option<String>)> {
        let rec = self.record.read().expect("job lock");
        rec.snapshots
            .get(index)
            .cloned()
            .ok_or((rec.status, rec.error.clone()))
    }

    pub fn results(&self) -> Option<Arc<JobResults>> {
        self.results.read().expect("job lock").clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<u64> {
        self.progress.subscribe()
    }

    fn update(&self, f: impl FnOnce(&mut JobRecord)) {
        f(&mut self.record.write().expect("job lock"));
        self.progress.send_modify(|v| *v += 1);
    }
}

#[derive(Debug)]
pub enum SubmitError {
    UnknownImage(String),
    Invalid(strokeforge::Error),
}

pub struct Store {
    images: RwLock<HashMap<String, Arc<GrayImage>>>,
    jobs: RwLock<HashMap<String, Arc<Job>>>,
    data_dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self {
            images: RwLock::default(),
            jobs: RwLock::default(),
            data_dir: None,
        }
    }

    /// Opens (creating if needed) a data directory and reloads its jobs.
    /// Jobs that were still queued or running are marked failed.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(dir.join("images"))?;
        std::fs::create_dir_all(dir.join("jobs"))?;
        let mut jobs = HashMap::new();
        for entry in std::fs::read_dir(dir.join("jobs"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let mut record: JobRecord = serde_json::from_slice(&std::fs::read(&path)?)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            if !record.status.is_terminal() {
                record.status = JobStatus::Failed;
                record.error = Some("interrupted by service restart".into());
            }
            let results = if record.status == JobStatus::Done {
                Some(read_results(&dir.join("jobs").join(&record.id))?)
            } else {
                None
            };
            jobs.insert(record.id.clone(), Arc::new(Job::new(record, results)));
        }
        Ok(Self {
            images: RwLock::default(),
            jobs: RwLock::new(jobs),
            data_dir: Some(dir),
        })
    }

    /// Decodes and stores an image; the id is the SHA-256 of its bytes.
    pub fn add_image(&self, bytes: &[u8]) -> Result<String, strokeforge::Error> {
        let id = hex::encode(Sha256::digest(bytes));
        if self.images.read().expect("image lock").contains_key(&id) {
            return Ok(id);
        }
        let img = decode_gray(bytes, false)?;
        if let Some(dir) = &self.data_dir {
            let path = dir.join("images").join(&id);
            std::fs::write(&path, bytes).map_err(|e| strokeforge::Error::Io { path, source: e })?;
        }
        self.images.write().expect("image lock").insert(id.clone(), Arc::new(img));
        Ok(id)
    }

    pub fn image(&self, id: &str) -> Option<Arc<GrayImage>> {
        if let Some(img) = self.images.read().expect("image lock").get(id) {
            return Some(img.clone());
        }
        // Content ids are hex; anything else never touches the filesystem.
        if id.len() != 64 || !id.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        let bytes = std::fs::read(self.data_dir.as_ref()?.join("images").join(id)).ok()?;
        let img = Arc::new(decode_gray(&bytes, false).ok()?);
        self.images.write().expect("image lock").insert(id.to_string(), img.clone());
        Some(img)
    }

    pub fn job(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs.read().expect("job lock").get(id).cloned()
    }

    /// Validates and queues a job; the caller runs it with [`Store::run`].
    pub fn submit(
        &self,
        image_id: &str,
        points: Vec<SamplePoint>,
        params: JobParams,
    ) -> Result<Arc<Job>, SubmitError> {
        let img = self
            .image(image_id)
            .ok_or_else(|| SubmitError::UnknownImage(image_id.to_string()))?;
        let set = SamplePointSet::new(points);
        set.validate(img.width(), img.height()).map_err(SubmitError::Invalid)?;
        params.validate().map_err(SubmitError::Invalid)?;
        let record = JobRecord {
            id: uuid::Uuid::new_v4().simple().to_string(),
            image_id: image_id.to_string(),
            points: set.points,
            params,
            status: JobStatus::Queued,
            snapshots: Vec::new(),
            error: None,
        };
        let job = Arc::new(Job::new(record.clone(), None));
        self.persist(&record);
        self.jobs.write().expect("job lock").insert(record.id.clone(), job.clone());
        Ok(job)
    }

    /// Runs a queued job to completion on the calling thread.
    pub fn run(&self, job: &Job) {
        let record = job.record();
        job.update(|r| r.status = JobStatus::Running);
        let outcome = self.image(&record.image_id).ok_or_else(|| "image disappeared".to_string()).and_then(|img| {
            execute(&img, &record, |snap| job.update(|r| r.snapshots.push(snap))).map_err(|e| e.to_string())
        });
        match outcome {
            Ok(results) => {
                if let Some(dir) = &self.data_dir {
                    if let Err(e) = write_results(&dir.join("jobs").join(&record.id), &results) {
                        job.update(|r| {
                            r.status = JobStatus::Failed;
                            r.error = Some(format!("could not persist results: {e}"));
                        });
                        self.persist(&job.record());
                        return;
                    }
                }
                *job.results.write().expect("job lock") = Some(Arc::new(results));
                job.update(|r| r.status = JobStatus::Done);
            }
            Err(e) => job.update(|r| {
                r.status = JobStatus::Failed;
                r.error = Some(e);
            }),
        }
        self.persist(&job.record());
    }

    fn persist(&self, record: &JobRecord) {
        let Some(dir) = &self.data_dir else { return };
        let path = dir.join("jobs").join(format!("{}.json", record.id));
        // Best effort: the in-memory record stays authoritative.
        if let Ok(text) = serde_json::to_vec(record) {
            let _ = std::fs::write(path, text);
        }
    }
}

fn execute(
    img: &GrayImage,
    record: &JobRecord,
    mut on_snapshot: impl FnMut(Snapshot),
) -> strokeforge::Result<JobResults> {
    let p = record.params;
    let mut input = if p.invert { img.inverted() } else { img.clone() };
    if let Some([lo, hi]) = p.stretch {
        input = input.histogram_stretch(StretchRange::new(lo, hi)?);
    }
    let config = RestoreConfig::new(p.energy, p.descent);
    let points = SamplePointSet::new(record.points.clone());
    let mut failure = None;
    let result = restore_with(&input, &points, &config, |state, energy| {
        let spline = state
            .curve
            .to_json()
            // The document holds only keys and numbers, so dropping all
            // whitespace yields a one-line event payload.
            .and_then(|text| RawValue::from_string(text.split_whitespace().collect()).map_err(Into::into));
        match spline {
            Ok(spline) => on_snapshot(Snapshot {
                iteration: state.iteration,
                energy: *energy,
                spline,
            }),
            Err(e) => failure = failure.take().or(Some(e)),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(JobResults {
        mask_png: result.mask.to_png_bytes()?,
        spline_json: result.curve.to_json()?,
        trace_csv: result.trace_csv()?,
    })
}

fn write_results(dir: &Path, results: &JobResults) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("mask.png"), &results.mask_png)?;
    std::fs::write(dir.join("spline.json"), &results.spline_json)?;
    std::fs::write(dir.join("trace.csv"), &results.trace_csv)
}

fn read_results(dir: &Path) -> io::Result<JobResults> {
    Ok(JobResults {
        mask_png: std::fs::read(dir.join("mask.png"))?,
        spline_json: std::fs::read_to_string(dir.join("spline.json"))?,
        trace_csv: std::fs::read_to_string(dir.join("trace.csv"))?,
    })
}
