//! Business-event classification: per-category binary logistic regression
//! over TF-IDF features, plus the training-set bootstrapping workflow
//! (embedding-based seed expansion, boolean-retrieval sampling) and
//! cross-validation.
//!
//! One-vs-rest: each category has an independent dataset and model, and a
//! document may carry several event labels.

pub mod cv;
pub mod embedding;
pub mod features;
pub mod logreg;
pub mod retrieval;

use serde::{Deserialize, Serialize};

pub use cv::{cross_validate, load_labeled_docs, stratified_folds, CvError, CvReport, LabeledDoc};
pub use embedding::{
    cosine, expand_seeds, EmbeddingError, EmbeddingTable, ExpansionReport, SeedExpansion,
};
pub use features::{featurize, featurize_tokens, stopword_set, FeatureVector, Vocabulary};
pub use logreg::{
    gradient, objective, sigmoid, train_logreg, LogRegModel, TrainError, TrainParams,
};
pub use retrieval::{boolean_retrieve, sample_training_pool, BooleanQuery};

/// The fixed closed set of business-event categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCategory {
    Layoffs,
    Strikes,
    Shutdowns,
    MaterialDamages,
    FinancialLosses,
    Frauds,
    LegalIssues,
    MergersAcquisitions,
    ProductLaunches,
    ManagementChanges,
}

impl EventCategory {
    pub const ALL: [EventCategory; 10] = [
        EventCategory::Layoffs,
        EventCategory::Strikes,
        EventCategory::Shutdowns,
        EventCategory::MaterialDamages,
        EventCategory::FinancialLosses,
        EventCategory::Frauds,
        EventCategory::LegalIssues,
        EventCategory::MergersAcquisitions,
        EventCategory::ProductLaunches,
        EventCategory::ManagementChanges,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EventCategory::Layoffs => "layoffs",
            EventCategory::Strikes => "strikes",
            EventCategory::Shutdowns => "shutdowns",
            EventCategory::MaterialDamages => "material_damages",
            EventCategory::FinancialLosses => "financial_losses",
            EventCategory::Frauds => "frauds",
            EventCategory::LegalIssues => "legal_issues",
            EventCategory::MergersAcquisitions => "mergers_acquisitions",
            EventCategory::ProductLaunches => "product_launches",
            EventCategory::ManagementChanges => "management_changes",
        }
    }

    pub fn parse(name: &str) -> Option<EventCategory> {
        EventCategory::ALL
            .iter()
            .copied()
            .find(|c| c.name() == name)
    }
}

impl std::fmt::Display for EventCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Versioned on-disk model dump; round-trip load reproduces identical
/// predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub category: String,
    pub model: LogRegModel,
}

impl ModelFile {
    pub const VERSION: u32 = 1;

    pub fn new(category: EventCategory, model: LogRegModel) -> Self {
        Self {
            version: Self::VERSION,
            category: category.name().to_string(),
            model,
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), String> {
        let json = serde_json::to_string(self).map_err(|e| e.to_string())?;
        std::fs::write(path, json).map_err(|e| format!("write {}: {e}", path.display()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let data =
            std::fs::read_to_string(path).map_err(|e| format!("read {}: {e}", path.display()))?;
        let mut file: ModelFile =
            serde_json::from_str(&data).map_err(|e| format!("parse {}: {e}", path.display()))?;
        if file.version != Self::VERSION {
            return Err(format!(
                "model file {} has version {}, expected {}",
                path.display(),
                file.version,
                Self::VERSION
            ));
        }
        file.model.vocabulary.reindex();
        Ok(file)
    }
}
