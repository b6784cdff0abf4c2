//! File formats: patient CSV, XES event logs, net JSON and DOT.

pub mod csv;
pub mod net;
pub mod xes;

pub use self::csv::{parse_patient_csv, write_patient_csv, CsvError};
pub use self::net::{read_net_json, write_dot, write_net_json, NetDocument, NetFormatError};
pub use self::xes::{read_xes, write_xes, write_xes_string, XesError};
