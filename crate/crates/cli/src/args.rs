use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcm_core::data::{CsvOptions, LabelColumn};
use mcm_core::{Dataset, GridSpec, KernelSpec, TrainConfig};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "mcm", version, about = "Minimal Complexity Machine classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and print a capacity report as JSON.
    Train(TrainArgs),
    /// Predict labels for a feature file.
    Predict(PredictArgs),
    /// Stratified k-fold cross-validation of one configuration.
    Cv(CvArgs),
    /// Cross-validated grid search over C (and gamma for rbf).
    Grid(GridArgs),
    /// Summarize a saved model.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Libsvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    HardLinear,
    SoftLinear,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Rbf,
    Poly,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input data file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Zero-based label column for CSV input (default: last column).
    #[arg(long)]
    pub label_col: Option<usize>,
    /// The CSV file starts with a header row.
    #[arg(long)]
    pub header: bool,
}

impl DataArgs {
    pub fn load(&self, unlabeled: bool) -> Result<Dataset, CliError> {
        if self.format == Format::Libsvm && (self.label_col.is_some() || self.header) {
            return Err(CliError::Usage(
                "--label-col and --header apply to CSV input only".into(),
            ));
        }
        if unlabeled && self.label_col.is_some() {
            return Err(CliError::Usage("--unlabeled conflicts with --label-col".into()));
        }
        let ds = match self.format {
            Format::Csv => {
                let label = match (unlabeled, self.label_col) {
                    (true, _) => LabelColumn::Absent,
                    (false, Some(i)) => LabelColumn::Index(i),
                    (false, None) => LabelColumn::Last,
                };
                let options = CsvOptions {
                    label,
                    has_header: self.header,
                    ..CsvOptions::default()
                };
                mcm_core::data::load_csv_with(&self.data, &options)?
            }
            Format::Libsvm => mcm_core::data::load_libsvm(&self.data)?,
        };
        Ok(ds)
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "soft-linear")]
    pub variant: VariantArg,
    /// Slack penalty for the soft variants (default 1).
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Kernel for the kernel variant (default rbf).
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// rbf width (default 1/n).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Polynomial degree (default 3).
    #[arg(long)]
    pub degree: Option<u32>,
    /// Polynomial offset (default 1).
    #[arg(long)]
    pub coef0: Option<f64>,
    /// Min-max scale features to [0, 1] using the training data.
    #[arg(long)]
    pub scale: bool,
}

impl ModelArgs {
    /// Checks flag combinations without looking at any data.
    pub fn check(&self) -> Result<(), CliError> {
        let kernel = self.kernel_kind();
        if self.variant != VariantArg::Kernel && self.kernel.is_some() {
            return Err(CliError::Usage("--kernel requires --variant kernel".into()));
        }
        if self.gamma.is_some() && kernel != Some(KernelArg::Rbf) {
            return Err(CliError::Usage("--gamma requires --kernel rbf".into()));
        }
        if (self.degree.is_some() || self.coef0.is_some()) && kernel != Some(KernelArg::Poly) {
            return Err(CliError::Usage("--degree and --coef0 require --kernel poly".into()));
        }
        if self.variant == VariantArg::HardLinear && self.c.is_some() {
            return Err(CliError::Usage("--C does not apply to --variant hard-linear".into()));
        }
        Ok(())
    }

    fn kernel_kind(&self) -> Option<KernelArg> {
        (self.variant == VariantArg::Kernel).then(|| self.kernel.unwrap_or(KernelArg::Rbf))
    }

    pub fn is_rbf(&self) -> bool {
        self.kernel_kind() == Some(KernelArg::Rbf)
    }

    /// The training configuration for data with `n` features.
    pub fn config(&self, n: usize) -> TrainConfig {
        let c = self.c.unwrap_or(1.0);
        match self.kernel_kind() {
            None if self.variant == VariantArg::HardLinear => TrainConfig::hard_linear(),
            None => TrainConfig::soft_linear(c),
            Some(KernelArg::Linear) => TrainConfig::soft_kernel(c, KernelSpec::linear()),
            Some(KernelArg::Rbf) => {
                let gamma = self.gamma.unwrap_or(1.0 / n.max(1) as f64);
                TrainConfig::soft_kernel(c, KernelSpec::rbf(gamma))
            }
            Some(KernelArg::Poly) => TrainConfig::soft_kernel(
                c,
                KernelSpec::polynomial(self.degree.unwrap_or(3), self.coef0.unwrap_or(1.0)),
            ),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Where to write the model JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the LP sent to the solver (CPLEX LP text). One-versus-rest
    /// training writes one file per class, suffixed with the class label.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// CSV rows hold features only.
    #[arg(long)]
    pub unlabeled: bool,
    /// Append decision values to each line, tab-separated.
    #[arg(long)]
    pub scores: bool,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Print the JSON report instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Record wall-clock training time per fold (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EvalArgs {
    pub fn check(&self) -> Result<(), CliError> {
        if self.folds < 2 {
            return Err(CliError::Usage(format!("--folds must be at least 2, got {}", self.folds)));
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Comma-separated C values (default 2^-5, 2^-3, ..., 2^15).
    #[arg(long, value_delimiter = ',')]
    pub grid_c: Option<Vec<f64>>,
    /// Comma-separated rbf gamma values (default 2^-15, 2^-13, ..., 2^3).
    #[arg(long, value_delimiter = ',')]
    pub grid_gamma: Option<Vec<f64>>,
}

impl GridArgs {
    pub fn check(&self) -> Result<(), CliError> {
        self.model.check()?;
        self.eval.check()?;
        if self.model.c.is_some() {
            return Err(CliError::Usage("grid takes --grid-c rather than --C".into()));
        }
        if self.model.gamma.is_some() {
            return Err(CliError::Usage("grid takes --grid-gamma rather than --gamma".into()));
        }
        if self.grid_gamma.is_some() && !self.model.is_rbf() {
            return Err(CliError::Usage("--grid-gamma requires --kernel rbf".into()));
        }
        if self.grid_c.is_some() && self.model.variant == VariantArg::HardLinear {
            return Err(CliError::Usage("--grid-c does not apply to --variant hard-linear".into()));
        }
        self.spec().validate()?;
        Ok(())
    }

    pub fn spec(&self) -> GridSpec {
        let default = GridSpec::default();
        GridSpec {
            c_values: self.grid_c.clone().unwrap_or(default.c_values),
            gamma_values: self.grid_gamma.clone().unwrap_or(default.gamma_values),
        }
    }
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Print the summary as JSON.
    #[arg(long)]
    pub json: bool,
}
