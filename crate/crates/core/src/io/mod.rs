//! Experiment configuration, persistence and CSV output.

mod config;
mod persist;
mod table;

pub use config::{Architecture, ExperimentConfig, Paths, ScaleProfile};
pub use persist::{
    atomic_write, load_cutnet, load_dataset, load_deeponet, load_json, save_cutnet, save_dataset, save_deeponet,
    save_json, write_config_echo, ArrayRecord, DatasetManifest, BLOB_FILE, CONFIG_ECHO_FILE, FORMAT_VERSION,
    MANIFEST_FILE,
};
pub use table::{csv_string, emit_metrics_csv, emit_train_csv, fmt_f64, metric_rows, METRIC_HEADER, TRAIN_HEADER};
