use std::path::Path;

use dfep::data::{gen_fig1, gen_synthetic_outlier, prepare, read_csv_str, CsvOptions, LabelColumn, QuantizationSpec};
use dfep::Instance;

use crate::args::{InputArgs, Synthetic};
use crate::Failure;

pub fn load(args: &InputArgs) -> Result<Instance, Failure> {
    match (&args.synthetic, &args.input) {
        (Some(Synthetic::Outlier), _) => Ok(gen_synthetic_outlier()),
        (Some(Synthetic::Fig1), _) => Ok(gen_fig1(true)),
        (Some(Synthetic::Fig1Core), _) => Ok(gen_fig1(false)),
        (None, Some(path)) => load_file(path, args),
        (None, None) => Err(Failure::parse("no input: pass a file or --synthetic")),
    }
}

fn load_file(path: &Path, args: &InputArgs) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(Failure::parse(format!("{}: file is empty", path.display())));
    }
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        return Instance::from_json(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())));
    }
    if !args.delimiter.is_ascii() {
        return Err(Failure::parse("delimiter must be a single ASCII character"));
    }
    let label = match &args.label_column {
        None => LabelColumn::Last,
        Some(s) => s.parse().map(LabelColumn::Index).unwrap_or_else(|_| LabelColumn::Name(s.clone())),
    };
    let options = CsvOptions {
        label,
        delimiter: args.delimiter as u8,
        missing: args.missing.split(',').map(str::to_string).collect(),
        continuous_above: args.levels,
    };
    let raw = read_csv_str(&text, &options).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    if raw.rejected_rows > 0 {
        eprintln!("rejected {} rows with missing values", raw.rejected_rows);
    }
    prepare(&raw, QuantizationSpec { levels: args.levels }, None)
        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}
