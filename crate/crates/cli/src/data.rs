use std::path::Path;

use anyhow::Context;
use lfpc_core::ingest::{self, DatasetManifest, IngestError, Variable};
use lfpc_core::segfit::PredictorKind;
use lfpc_core::series::log_change;
use lfpc_core::{AnnualSeries, Unit};

use crate::config_err;

pub struct Dataset {
    pub manifest: DatasetManifest,
}

impl Dataset {
    pub fn open(path: &Path) -> anyhow::Result<Self> {
        let manifest = ingest::load_manifest(path).map_err(|e| config_err(e.to_string()))?;
        Ok(Self { manifest })
    }

    pub fn variable(&self, id: &str) -> anyhow::Result<Variable> {
        self.manifest
            .entry(id)
            .map(|e| e.variable)
            .ok_or_else(|| config_err(format!("series `{id}` is not in the manifest")))
    }

    pub fn kind(&self, id: &str) -> anyhow::Result<PredictorKind> {
        Ok(match self.variable(id)? {
            Variable::Unemployment => PredictorKind::Unemployment,
            _ => PredictorKind::LabourForceChange,
        })
    }

    /// The series as stored, unit-normalized.
    pub fn raw(&self, id: &str) -> anyhow::Result<AnnualSeries> {
        self.variable(id)?;
        ingest::load_series(&self.manifest, id).map_err(|e| match e {
            IngestError::MissingSeries(_) => config_err(e.to_string()),
            other => anyhow::Error::new(other),
        })
    }

    /// Annual rate: levels of level-type variables are log-differenced.
    pub fn rate(&self, id: &str) -> anyhow::Result<AnnualSeries> {
        let s = self.raw(id)?;
        if self.variable(id)?.is_level_quantity() && s.unit() == Unit::Level {
            Ok(log_change(&s).with_context(|| format!("log change of `{id}`"))?)
        } else {
            Ok(s)
        }
    }
}
