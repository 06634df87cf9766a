//! Replays the checked-in fuzz seeds through the same entry points as the
//! fuzz targets, so the seeds stay valid inputs.

use std::path::PathBuf;

use thermoconvex::transforms::ChainSpec;
use thermoconvex_cli::eval::{evaluate, parse_eos, parse_point, Quantity};
use thermoconvex_cli::RunConfig;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    for (name, text) in seeds("config_json") {
        match RunConfig::from_json(&text) {
            Ok(cfg) => {
                let back = RunConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
                assert_eq!(cfg.hash(), back.hash(), "{name}");
            }
            Err(e) => assert_eq!(e.exit_code(), 2, "{name}: {e}"),
        }
    }
}

#[test]
fn chain_seeds_round_trip() {
    for (name, text) in seeds("chain_spec") {
        let spec: ChainSpec = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again: ChainSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again, "{name}");
    }
}

#[test]
fn eval_seeds() {
    for (name, text) in seeds("eval_spec") {
        let mut lines = text.splitn(3, '\n');
        let (q, eos, at) = (lines.next().unwrap(), lines.next().unwrap(), lines.next().unwrap());
        let quantity = Quantity::from_name(q).unwrap_or_else(|| panic!("{name}: quantity"));
        let model = parse_eos(eos).unwrap().build().unwrap();
        let point = parse_point(at, &quantity.variables(1)).unwrap();
        let r = evaluate(&model, quantity, q, 1, &point);
        assert!(r.is_ok() || r.unwrap_err().exit_code() == 3, "{name}");
    }
}
