//! Writes the stand-in bootstrap dataset: `cargo run --example write_standin -- data/standin.csv`.

use std::path::PathBuf;

use mpme::experiments::stand_in_dataset;
use mpme::io::{write_dataset, DatasetFile, DatasetFormat};

fn main() -> mpme::Result<()> {
    let path = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| String::from("standin.csv")),
    );
    write_dataset(
        &path,
        &DatasetFile::new(stand_in_dataset()),
        DatasetFormat::from_path(&path),
    )
}
