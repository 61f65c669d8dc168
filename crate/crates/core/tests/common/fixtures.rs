use std::path::PathBuf;

pub struct TableRow {
    pub system: String,
    pub metrics: [f64; 9],
    pub reward_u: f64,
    pub reward_h: f64,
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load_table(name: &str) -> Vec<TableRow> {
    let mut rdr = csv::Reader::from_path(data_path(name)).expect("fixture exists");
    rdr.records()
        .map(|rec| {
            let rec = rec.expect("fixture row");
            let num = |i: usize| rec[i].parse::<f64>().expect("number");
            let mut metrics = [0.0; 9];
            for (i, m) in metrics.iter_mut().enumerate() {
                *m = num(i + 1);
            }
            TableRow { system: rec[0].to_owned(), metrics, reward_u: num(10), reward_h: num(11) }
        })
        .collect()
}
