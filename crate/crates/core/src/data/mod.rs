//! Datasets: the labeled row container, synthetic Gaussian sampling, CSV
//! ingestion and train/test construction.

mod dataset;
mod gaussian;
mod split;
mod tabular;

pub use dataset::LabeledDataset;
pub use gaussian::{
    binary_space, gaussian_sample, minority_joint, CellGaussian, DesignParams, GaussianSpec,
};
pub use split::{make_pstar_testset, split_train_test};
pub use tabular::{
    load_csv, parse_tabular, read_csv_raw, ProtectedColumn, RawTabular, Standardizer, TabularData,
    TabularSchema,
};
