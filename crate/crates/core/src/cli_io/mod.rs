//! Input parsing, bundled datasets, reports and the reference examples used
//! by the command-line tool.

mod golden;
mod input;
mod report;

pub use golden::{run_example, ExampleName, ExampleReport, GoldenCheck, TOLERANCE};
pub use input::{
    bundled, parse_one_arm_csv, parse_two_arm_csv, read_one_arm, read_two_arm, InputFile,
    OneArmTable, TwoArmTable, BUNDLED, ONE_ARM_HEADER, TWO_ARM_HEADER,
};
pub use report::{simulation_csv, Provenance, ReportDocument, StudyRow, SIM_CSV_HEADER};
