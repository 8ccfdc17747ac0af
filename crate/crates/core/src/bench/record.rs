use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One point of an error-versus-queries curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub problem: String,
    pub setting: String,
    /// Measured queries, not the nominal budget.
    pub n_queries: u64,
    /// Error quantile at the configured failure probability.
    pub err_q75: f64,
    pub trials: usize,
    pub seed: u64,
    pub wall_ms: u64,
}

pub fn write_csv(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[ExperimentRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let want = ["problem", "setting", "n_queries", "err_q75", "trials", "seed", "wall_ms"];
    let header = rd.headers().map_err(|e| Error::Csv(e.to_string()))?;
    if header.iter().ne(want.iter().copied()) {
        return Err(Error::Csv(format!("unexpected header '{}'", header.iter().collect::<Vec<_>>().join(","))));
    }
    rd.deserialize().map(|r| r.map_err(|e| Error::Csv(e.to_string()))).collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(n: u64, e: f64) -> ExperimentRecord {
        ExperimentRecord { problem: "mean".into(), setting: "q".into(), n_queries: n, err_q75: e, trials: 200, seed: 3, wall_ms: 0 }
    }

    #[test]
    fn header_follows_the_schema() {
        let text = to_csv_string(&[record(28, 0.5)]).unwrap();
        assert_eq!(text.lines().next().unwrap(), "problem,setting,n_queries,err_q75,trials,seed,wall_ms");
        assert!(parse_csv("a,b\n1,2\n").is_err());
        assert!(parse_csv("problem,setting,n_queries,err_q75,trials,seed,wall_ms\nmean,q,x,1,1,1,1\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let recs = vec![record(12, 0.99), record(508, 3.872e-2)];
        write_csv(&path, &recs).unwrap();
        assert_eq!(read_csv(&path).unwrap(), recs);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(n in 1u64..u64::MAX / 2, e in 1e-300f64..1e3, t in 1usize..10_000, seed: u64) {
            let r = ExperimentRecord { problem: "poisson-disk/circle".into(), setting: "ran".into(), n_queries: n, err_q75: e, trials: t, seed, wall_ms: 17 };
            let back = parse_csv(&to_csv_string(std::slice::from_ref(&r)).unwrap()).unwrap();
            prop_assert_eq!(back[0].err_q75.to_bits(), e.to_bits());
            prop_assert_eq!(&back[0], &r);
        }
    }
}
