//! Patient-data CSV: one row per clinical record, `,` delimited, empty
//! cells for missing values.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use thiserror::Error;

use crate::model::{CardiovascularOutcome, PatientDatum};

/// Column names in canonical output order.
pub const COLUMNS: [&str; 20] = [
    "PatID",
    "LVEF",
    "HFrEF",
    "HFmrEF",
    "HFpEF",
    "Weight",
    "HF diagnosis",
    "NT pro-BNP",
    "Diabetes",
    "CKD",
    "Outcome",
    "WBC",
    "hsTNT",
    "IL-6",
    "Urea",
    "Beta-Blocker",
    "ACE-I/ARNI",
    "SGLT-2",
    "MRA",
    "Timestamp",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing required column '{0}'")]
    MissingColumn(&'static str),
    #[error("row {row}: column '{column}': {message}")]
    Row {
        row: usize,
        column: String,
        message: String,
    },
    #[error("malformed CSV: {0}")]
    Malformed(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct RowReader<'r> {
    record: &'r csv::StringRecord,
    columns: &'r [usize; COLUMNS.len()],
    row: usize,
}

impl RowReader<'_> {
    fn cell(&self, col: usize) -> &str {
        self.record.get(self.columns[col]).unwrap_or("").trim()
    }

    fn err(&self, col: usize, message: String) -> CsvError {
        CsvError::Row {
            row: self.row,
            column: COLUMNS[col].to_string(),
            message,
        }
    }

    fn int(&self, col: usize) -> Result<Option<i64>, CsvError> {
        let s = self.cell(col);
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<i64>()
            .map(Some)
            .map_err(|_| self.err(col, format!("expected an integer, found '{s}'")))
    }

    fn real(&self, col: usize) -> Result<Option<f64>, CsvError> {
        let s = self.cell(col);
        if s.is_empty() {
            return Ok(None);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(self.err(col, format!("expected a number, found '{s}'"))),
        }
    }

    fn boolean(&self, col: usize) -> Result<Option<bool>, CsvError> {
        let s = self.cell(col);
        match s.to_ascii_lowercase().as_str() {
            "" => Ok(None),
            "1" | "true" => Ok(Some(true)),
            "0" | "false" => Ok(Some(false)),
            _ => Err(self.err(col, format!("expected 0/1/true/false, found '{s}'"))),
        }
    }
}

/// Parses patient records. Row indices start at 1 in file order.
pub fn parse_patient_csv<R: Read>(input: R) -> Result<Vec<PatientDatum>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let normalized: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();

    let mut columns = [0usize; COLUMNS.len()];
    for (slot, name) in columns.iter_mut().zip(COLUMNS) {
        *slot = normalized
            .iter()
            .position(|h| *h == name.to_lowercase())
            .ok_or(CsvError::MissingColumn(name))?;
    }
    let extra_columns: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !columns.contains(i))
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();

    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let r = RowReader {
            record: &record,
            columns: &columns,
            row,
        };
        let pat_id = r.cell(0).to_string();
        if pat_id.is_empty() {
            return Err(r.err(0, "patient id is empty".into()));
        }
        let lvef = r.int(1)?;
        if let Some(v) = lvef {
            if !(0..=100).contains(&v) {
                return Err(r.err(1, format!("LVEF {v} outside [0, 100]")));
            }
        }
        let outcome = match r.cell(10) {
            "" => None,
            s => Some(
                s.parse::<CardiovascularOutcome>()
                    .map_err(|e| r.err(10, e.to_string()))?,
            ),
        };
        let ts_raw = r.cell(19);
        let timestamp = NaiveDate::parse_from_str(ts_raw, "%Y-%m-%d")
            .map_err(|_| r.err(19, format!("expected YYYY-MM-DD, found '{ts_raw}'")))?;

        let datum = PatientDatum {
            pat_id,
            lvef,
            hfref: r.boolean(2)?,
            hfmref: r.boolean(3)?,
            hfpef: r.boolean(4)?,
            weight: r.real(5)?,
            hf_diagnosis_year: r.int(6)?,
            nt_pro_bnp: r.real(7)?,
            diabetes: r.boolean(8)?,
            ckd: r.boolean(9)?,
            outcome,
            wbc: r.real(11)?,
            hstnt: r.real(12)?,
            il6: r.real(13)?,
            urea: r.real(14)?,
            beta_blocker: r.real(15)?,
            acei_arni: r.real(16)?,
            sglt2: r.real(17)?,
            mra: r.real(18)?,
            timestamp,
            row_index: row,
            extra: extra_columns
                .iter()
                .map(|(idx, name)| {
                    (name.clone(), record.get(*idx).unwrap_or("").to_string())
                })
                .collect::<BTreeMap<_, _>>(),
        };
        let phenotype_flags = [datum.hfref, datum.hfmref, datum.hfpef];
        if phenotype_flags.iter().filter(|f| **f == Some(true)).count() > 1 {
            return Err(r.err(2, "more than one phenotype flag is set".into()));
        }
        out.push(datum);
    }
    Ok(out)
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_bool(v: Option<bool>) -> String {
    v.map(|b| if b { "1" } else { "0" }.to_string())
        .unwrap_or_default()
}

/// Writes records in the order given. Extra columns are appended after the
/// fixed schema, sorted by name.
pub fn write_patient_csv<W: Write>(data: &[PatientDatum], out: W) -> Result<(), CsvError> {
    let extra: Vec<String> = data
        .iter()
        .flat_map(|d| d.extra.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut writer = csv::WriterBuilder::new().from_writer(out);
    writer.write_record(COLUMNS.iter().copied().chain(extra.iter().map(String::as_str)))?;
    for d in data {
        let mut row = vec![
            d.pat_id.clone(),
            fmt_opt(d.lvef),
            fmt_bool(d.hfref),
            fmt_bool(d.hfmref),
            fmt_bool(d.hfpef),
            fmt_opt(d.weight),
            fmt_opt(d.hf_diagnosis_year),
            fmt_opt(d.nt_pro_bnp),
            fmt_bool(d.diabetes),
            fmt_bool(d.ckd),
            fmt_opt(d.outcome),
            fmt_opt(d.wbc),
            fmt_opt(d.hstnt),
            fmt_opt(d.il6),
            fmt_opt(d.urea),
            fmt_opt(d.beta_blocker),
            fmt_opt(d.acei_arni),
            fmt_opt(d.sglt2),
            fmt_opt(d.mra),
            d.timestamp.format("%Y-%m-%d").to_string(),
        ];
        row.extend(
            extra
                .iter()
                .map(|k| d.extra.get(k).cloned().unwrap_or_default()),
        );
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const EXAMPLE_CSV: &str = "\
PatID,LVEF,HFrEF,HFmrEF,HFpEF,Weight,HF diagnosis,NT pro-BNP,Diabetes,CKD,Outcome,WBC,hsTNT,IL-6,Urea,Beta-Blocker,ACE-I/ARNI,SGLT-2,MRA,Timestamp
007,50,0,0,1,80,2017,750.5,1,,,,24.9,10.5,38,100,50,10,12.5,2023-02-20
007,50,0,0,1,80,2017,750.5,1,,HF,,24.9,10.5,38,100,50,10,12.5,2023-02-21
007,50,0,0,1,80,2017,750.5,1,,Death_HF,,24.9,10.5,38,100,50,10,12.5,2023-02-20
008,10,1,0,0,99,2012,,,,,10.2,24.9,10.5,,,,15,,2023-02-20
";

    #[test]
    fn parses_first_table_row() {
        let rows = parse_patient_csv(EXAMPLE_CSV.as_bytes()).unwrap();
        assert_eq!(rows.len(), 4);
        let r = &rows[0];
        assert_eq!(r.pat_id, "007");
        assert_eq!(r.lvef, Some(50));
        assert_eq!(r.hfpef, Some(true));
        assert_eq!(r.hfref, Some(false));
        assert_eq!(r.nt_pro_bnp, Some(750.5));
        assert_eq!(r.diabetes, Some(true));
        assert_eq!(r.ckd, None);
        assert_eq!(r.outcome, None);
        assert_eq!(r.wbc, None);
        assert_eq!(r.timestamp, NaiveDate::from_ymd_opt(2023, 2, 20).unwrap());
        assert_eq!(r.row_index, 1);
        assert_eq!(rows[2].outcome, Some(CardiovascularOutcome::DeathHf));
        assert_eq!(rows[3].row_index, 4);
        assert_eq!(rows[3].sglt2, Some(15.0));
    }

    #[test]
    fn unknown_outcome_is_a_row_error() {
        let csv = EXAMPLE_CSV.replace("Death_HF", "Cardiac_Arrest");
        match parse_patient_csv(csv.as_bytes()) {
            Err(CsvError::Row { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "Outcome");
            }
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_named() {
        let csv = EXAMPLE_CSV.replace(",MRA,", ",Other,");
        match parse_patient_csv(csv.as_bytes()) {
            Err(CsvError::MissingColumn(c)) => assert_eq!(c, "MRA"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn bad_date_and_number_report_row() {
        let csv = EXAMPLE_CSV.replace("2023-02-21", "21/02/2023");
        assert!(matches!(
            parse_patient_csv(csv.as_bytes()),
            Err(CsvError::Row { row: 2, .. })
        ));
        let csv = EXAMPLE_CSV.replacen("750.5", "lots", 1);
        assert!(matches!(
            parse_patient_csv(csv.as_bytes()),
            Err(CsvError::Row { row: 1, .. })
        ));
    }

    #[test]
    fn headers_match_case_insensitively_and_extras_survive() {
        let csv = EXAMPLE_CSV
            .replacen("PatID", "patid", 1)
            .replacen("Timestamp\n", "Timestamp,Ward\n", 1)
            .replace("2023-02-20\n", "2023-02-20,A\n")
            .replace("2023-02-21\n", "2023-02-21,\n");
        let rows = parse_patient_csv(csv.as_bytes()).unwrap();
        assert_eq!(rows[0].extra["Ward"], "A");
        assert_eq!(rows[1].extra["Ward"], "");
        assert!(rows[1].attributes()["Ward"].is_missing());
    }

    #[test]
    fn booleans_accept_words() {
        let csv = EXAMPLE_CSV.replacen(",0,0,1,", ",FALSE,false,True,", 1);
        let rows = parse_patient_csv(csv.as_bytes()).unwrap();
        assert_eq!(rows[0].hfpef, Some(true));
        assert_eq!(rows[0].hfmref, Some(false));
    }

    #[test]
    fn parse_write_parse_fixpoint_on_table() {
        let rows = parse_patient_csv(EXAMPLE_CSV.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_patient_csv(&rows, &mut buf).unwrap();
        assert_eq!(parse_patient_csv(buf.as_slice()).unwrap(), rows);
    }

    fn arb_datum() -> impl Strategy<Value = PatientDatum> {
        (
            "[0-9]{1,3}",
            proptest::option::of(0i64..=100),
            proptest::option::of(any::<bool>()),
            proptest::option::of(0.0f64..5000.0),
            proptest::option::of(0usize..6),
            0i64..2000,
        )
            .prop_map(|(id, lvef, diabetes, bnp, outcome, day)| {
                let ts = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap()
                    + chrono::Duration::days(day);
                PatientDatum {
                    lvef,
                    diabetes,
                    nt_pro_bnp: bnp,
                    outcome: outcome.map(|i| CardiovascularOutcome::ALL[i]),
                    ..PatientDatum::new(id, ts, 0)
                }
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_fixpoint(data in prop::collection::vec(arb_datum(), 0..20)) {
            let data: Vec<PatientDatum> = data
                .into_iter()
                .enumerate()
                .map(|(i, d)| PatientDatum { row_index: i + 1, ..d })
                .collect();
            let mut buf = Vec::new();
            write_patient_csv(&data, &mut buf).unwrap();
            let parsed = parse_patient_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(&parsed, &data);
            let mut buf2 = Vec::new();
            write_patient_csv(&parsed, &mut buf2).unwrap();
            prop_assert_eq!(buf, buf2);
        }
    }
}
