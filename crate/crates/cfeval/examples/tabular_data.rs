//! Load a CSV dataset against a schema declaration, encode records as
//! one-hot vectors, and see how malformed values are rejected.
//!
//! ```bash
//! cargo run --example tabular_data
//! ```

use cfeval::dataset::load_tabular;

const SCHEMA: &str = r#"
[[feature]]
name = "race"
kind = "categorical"
values = ["groupA", "groupB", "groupC"]

[[feature]]
name = "gender"
kind = "categorical"
values = ["male", "female"]

[[feature]]
name = "agegroup"
kind = "categorical"
values = ["10-16", "17-34", "35-48", "49+"]
"#;

const CSV: &str = "\
race,gender,agegroup,label
groupA,male,10-16,1
groupB,female,35-48,0
groupC,male,49+,0
groupA,female,17-34,1
";

fn main() {
    let dir = std::env::temp_dir().join("cfeval-tabular-example");
    std::fs::create_dir_all(&dir).expect("writable temp dir");
    let schema_path = dir.join("schema.toml");
    let csv_path = dir.join("data.csv");
    std::fs::write(&schema_path, SCHEMA).unwrap();
    std::fs::write(&csv_path, CSV).unwrap();

    let dataset = load_tabular(&csv_path, &schema_path).expect("well-formed input");
    println!(
        "loaded {} rows over {} features (representation width {})",
        dataset.len(),
        dataset.schema().feature_count(),
        dataset.schema().width()
    );

    for (i, inst) in dataset.instances().iter().enumerate() {
        let rep = dataset.schema().encode(inst).expect("valid row");
        let decoded = dataset.schema().decode(&rep).expect("on the grid");
        assert_eq!(decoded.values, inst.values);
        println!(
            "row {i}: values {:?} label {:?} -> one-hot {:?}",
            inst.values, inst.gold_label, rep.values
        );
    }

    // a value outside the declared vocabulary is rejected with its location
    std::fs::write(
        &csv_path,
        "race,gender,agegroup\ngroupA,male,10-16\ngroupA,purple,17-34\n",
    )
    .unwrap();
    let err = load_tabular(&csv_path, &schema_path).unwrap_err();
    println!("malformed value rejected: {err}");
}
