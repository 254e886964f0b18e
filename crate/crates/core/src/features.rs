//! Advising attributes derived from student course records, plus a seeded
//! generator of labeled synthetic advising data.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{
    assign_class, remove_attributes, AttributeKind, AttributeSpec, Cell, Dataset, DatasetError,
    Instance,
};

pub const SID: &str = "SId";
pub const TOTAL_REG: &str = "Total_Reg_C_H";
pub const TOTAL_GAIN: &str = "Total_Gain_C_H";
pub const TOTAL_CUR: &str = "Total_Cur_C_H";
pub const SEM_GPA: &str = "Sem_GPA";
pub const CUM_GPA: &str = "CUM_GPA";
pub const DIFF: &str = "Diff_G_R_C_H";
pub const CATG: &str = "Catg";
pub const L_STATUS: &str = "L_STATUS";
pub const GEN: &str = "GEN";
pub const AD_STATUS: &str = "Ad_STATUS";
pub const PLAN_STUDY: &str = "Plan_Study";

/// Column order of the advising table.
pub const ADVISING_COLUMNS: [&str; 12] = [
    SID, TOTAL_REG, TOTAL_GAIN, TOTAL_CUR, SEM_GPA, CUM_GPA, DIFF, CATG, L_STATUS, GEN, AD_STATUS,
    PLAN_STUDY,
];

/// Attributes removed before induction.
pub const ELIMINATED: [&str; 4] = [SID, GEN, SEM_GPA, CUM_GPA];

pub const IN_STUDY: &str = "In Study";
pub const GRADUATED: &str = "Graduated";
pub const DISMISSED: &str = "Dismissed";

/// Credit-hour difference above which an enrolled student leaves the safe zone.
pub const DIFF_LIMIT: f64 = 36.0;
/// Registered-hour band inside which a high-difference student is still Normal.
pub const REG_LOW: f64 = 137.0;
pub const REG_HIGH: f64 = 157.0;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("course {0:?}: credit hours must be positive")]
    CreditHours(String),
    #[error("course {0:?}: grade weight must lie in [0, 5]")]
    GradeWeight(String),
    #[error("course {0:?}: a passed course must be registered")]
    PassedNotRegistered(String),
    #[error("no courses to average")]
    NoCourses,
    #[error("GPA {0} outside [0, 5]")]
    GpaRange(f64),
    #[error("no student records")]
    NoRecords,
    #[error("student {0}: gained hours exceed registered hours")]
    GainExceedsRegistered(u64),
    #[error("sample size must be at least 1")]
    ZeroSamples,
    #[error("noise rate {0} outside [0, 1]")]
    NoiseRate(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CourseOutcome {
    pub course_id: String,
    pub credit_hours: f64,
    /// Grade weight on the 5-point scale.
    pub grade_weight: f64,
    pub registered: bool,
    pub passed: bool,
}

impl CourseOutcome {
    pub fn new(
        course_id: impl Into<String>,
        credit_hours: f64,
        grade_weight: f64,
        registered: bool,
        passed: bool,
    ) -> Result<Self, FeatureError> {
        let course_id = course_id.into();
        if !(credit_hours > 0.0 && credit_hours.is_finite()) {
            return Err(FeatureError::CreditHours(course_id));
        }
        if !(0.0..=5.0).contains(&grade_weight) {
            return Err(FeatureError::GradeWeight(course_id));
        }
        if passed && !registered {
            return Err(FeatureError::PassedNotRegistered(course_id));
        }
        Ok(Self {
            course_id,
            credit_hours,
            grade_weight,
            registered,
            passed,
        })
    }
}

/// Registered minus passed credit hours.
pub fn credit_hour_difference(courses: &[CourseOutcome]) -> f64 {
    let registered: f64 = courses
        .iter()
        .filter(|c| c.registered)
        .map(|c| c.credit_hours)
        .sum();
    let passed: f64 = courses
        .iter()
        .filter(|c| c.passed)
        .map(|c| c.credit_hours)
        .sum();
    registered - passed
}

/// Credit-weighted mean of grade weights over the semester's courses.
pub fn semester_gpa(courses: &[CourseOutcome]) -> Result<f64, FeatureError> {
    if courses.is_empty() {
        return Err(FeatureError::NoCourses);
    }
    let hours: f64 = courses.iter().map(|c| c.credit_hours).sum();
    let points: f64 = courses
        .iter()
        .map(|c| c.grade_weight * c.credit_hours)
        .sum();
    Ok(points / hours)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GpaBand {
    Below2,
    /// Closed band `[2, 2.75]`.
    Mid2to275,
    Above275,
}

impl fmt::Display for GpaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GpaBand::Below2 => "Below2",
            GpaBand::Mid2to275 => "Mid2to275",
            GpaBand::Above275 => "Above275",
        })
    }
}

pub fn gpa_band(gpa: f64) -> Result<GpaBand, FeatureError> {
    if !(0.0..=5.0).contains(&gpa) {
        return Err(FeatureError::GpaRange(gpa));
    }
    Ok(if gpa < 2.0 {
        GpaBand::Below2
    } else if gpa <= 2.75 {
        GpaBand::Mid2to275
    } else {
        GpaBand::Above275
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdStatus {
    Normal,
    NearToRisk,
    InRisk,
}

impl AdStatus {
    pub const ALL: [AdStatus; 3] = [AdStatus::Normal, AdStatus::NearToRisk, AdStatus::InRisk];

    pub fn as_str(self) -> &'static str {
        match self {
            AdStatus::Normal => "Normal",
            AdStatus::NearToRisk => "Near To Risk",
            AdStatus::InRisk => "In Risk",
        }
    }
}

impl fmt::Display for AdStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the advising table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentRecord {
    pub sid: u64,
    pub total_reg: f64,
    pub total_gain: f64,
    pub total_cur: f64,
    pub diff: f64,
    pub sem_gpa: f64,
    pub cum_gpa: f64,
    pub catg: String,
    pub l_status: String,
    pub gen: String,
    pub plan_study: String,
    pub ad_status: AdStatus,
}

/// The advisor's rule set the synthetic labels are drawn from.
pub fn planted_label(l_status: &str, diff: f64, total_reg: f64) -> AdStatus {
    match l_status {
        GRADUATED => AdStatus::Normal,
        DISMISSED => AdStatus::InRisk,
        _ if diff <= DIFF_LIMIT => AdStatus::Normal,
        _ if total_reg <= REG_LOW => AdStatus::NearToRisk,
        _ if total_reg <= REG_HIGH => AdStatus::Normal,
        _ => AdStatus::NearToRisk,
    }
}

impl StudentRecord {
    pub fn planted_label(&self) -> AdStatus {
        planted_label(&self.l_status, self.diff, self.total_reg)
    }
}

/// The full advising table (all twelve columns) for `records`. Nominal values
/// are declared in first-appearance order so the table equals what the CSV
/// reader infers from its own serialization.
pub fn advising_table(records: &[StudentRecord]) -> Result<Dataset, FeatureError> {
    if records.is_empty() {
        return Err(FeatureError::NoRecords);
    }
    for r in records {
        if r.total_gain > r.total_reg {
            return Err(FeatureError::GainExceedsRegistered(r.sid));
        }
    }

    fn nominal_column(name: &str, cells: Vec<&str>) -> (AttributeSpec, Vec<Cell>) {
        let mut values: Vec<String> = Vec::new();
        let cells = cells
            .into_iter()
            .map(|v| {
                let idx = values.iter().position(|x| x == v).unwrap_or_else(|| {
                    values.push(v.to_string());
                    values.len() - 1
                });
                Cell::Nominal(idx)
            })
            .collect();
        let spec = AttributeSpec {
            name: name.to_string(),
            kind: AttributeKind::Nominal { values },
            index: 0,
        };
        (spec, cells)
    }
    fn numeric_column(name: &str, cells: Vec<f64>) -> (AttributeSpec, Vec<Cell>) {
        (
            AttributeSpec::numeric(name),
            cells.into_iter().map(Cell::Numeric).collect(),
        )
    }

    let columns = vec![
        numeric_column(SID, records.iter().map(|r| r.sid as f64).collect()),
        numeric_column(TOTAL_REG, records.iter().map(|r| r.total_reg).collect()),
        numeric_column(TOTAL_GAIN, records.iter().map(|r| r.total_gain).collect()),
        numeric_column(TOTAL_CUR, records.iter().map(|r| r.total_cur).collect()),
        numeric_column(SEM_GPA, records.iter().map(|r| r.sem_gpa).collect()),
        numeric_column(CUM_GPA, records.iter().map(|r| r.cum_gpa).collect()),
        numeric_column(
            DIFF,
            records.iter().map(|r| r.total_reg - r.total_gain).collect(),
        ),
        nominal_column(CATG, records.iter().map(|r| r.catg.as_str()).collect()),
        nominal_column(
            L_STATUS,
            records.iter().map(|r| r.l_status.as_str()).collect(),
        ),
        nominal_column(GEN, records.iter().map(|r| r.gen.as_str()).collect()),
        nominal_column(
            AD_STATUS,
            records.iter().map(|r| r.ad_status.as_str()).collect(),
        ),
        nominal_column(
            PLAN_STUDY,
            records.iter().map(|r| r.plan_study.as_str()).collect(),
        ),
    ];

    let schema = columns.iter().map(|(s, _)| s.clone()).collect();
    let instances = (0..records.len())
        .map(|i| Instance::new(columns.iter().map(|(_, c)| c[i]).collect()))
        .collect();
    Ok(Dataset::new(schema, instances)?)
}

/// The induction-ready dataset: identifier, gender and both GPA columns
/// removed, `Ad_STATUS` as class, `Diff_G_R_C_H` recomputed from the totals.
pub fn derive_student_dataset(records: &[StudentRecord]) -> Result<Dataset, FeatureError> {
    let table = advising_table(records)?;
    let table = assign_class(&table, AD_STATUS)?;
    Ok(remove_attributes(&table, &ELIMINATED)?)
}

const CATEGORIES: [&str; 2] = ["A", "B"];
const GENDERS: [&str; 2] = ["M", "F"];
const PLANS: [&str; 3] = ["old", "new", "developed"];

/// Seeded synthetic advising records.
///
/// Numeric fields are integers: `Total_Reg_C_H` uniform in [12, 180], the
/// credit-hour difference uniform in [0, min(Total_Reg_C_H, 90)], gained
/// hours the remainder, current-semester hours uniform in [9, 21]. Learning
/// status is In Study with probability 0.7, Graduated 0.15, Dismissed 0.15.
/// GPAs are drawn on a two-decimal grid in [0, 5]. Labels follow
/// [`planted_label`]; with probability `noise_rate` a label is replaced by a
/// uniformly chosen different one.
pub fn generate_synthetic(
    n: usize,
    seed: u64,
    noise_rate: f64,
) -> Result<Vec<StudentRecord>, FeatureError> {
    if n == 0 {
        return Err(FeatureError::ZeroSamples);
    }
    if !(0.0..=1.0).contains(&noise_rate) {
        return Err(FeatureError::NoiseRate(noise_rate));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let total_reg = rng.gen_range(12..=180u32) as f64;
        let diff = rng.gen_range(0..=(total_reg as u32).min(90)) as f64;
        let total_gain = total_reg - diff;
        let total_cur = rng.gen_range(9..=21u32) as f64;
        let roll: f64 = rng.gen();
        let l_status = if roll < 0.7 {
            IN_STUDY
        } else if roll < 0.85 {
            GRADUATED
        } else {
            DISMISSED
        };
        let sem_gpa = rng.gen_range(0..=500u32) as f64 / 100.0;
        let cum_gpa = rng.gen_range(0..=500u32) as f64 / 100.0;
        let catg = CATEGORIES.choose(&mut rng).copied().unwrap_or("A");
        let gen = GENDERS.choose(&mut rng).copied().unwrap_or("M");
        let plan = PLANS.choose(&mut rng).copied().unwrap_or("new");

        let mut ad_status = planted_label(l_status, diff, total_reg);
        if rng.gen::<f64>() < noise_rate {
            let others: Vec<AdStatus> = AdStatus::ALL
                .into_iter()
                .filter(|s| *s != ad_status)
                .collect();
            ad_status = others[rng.gen_range(0..others.len())];
        }

        records.push(StudentRecord {
            sid: 100_001 + i as u64,
            total_reg,
            total_gain,
            total_cur,
            diff,
            sem_gpa,
            cum_gpa,
            catg: catg.to_string(),
            l_status: l_status.to_string(),
            gen: gen.to_string(),
            plan_study: plan.to_string(),
            ad_status,
        });
    }
    Ok(records)
}

fn parse_flag(token: &str) -> Option<bool> {
    match token.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Some(true),
        "false" | "0" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// Reads the raw course-record CSV
/// (`studentId,courseId,creditHours,gradeWeight,registered,passed`),
/// returning `(studentId, outcome)` pairs in file order.
pub fn parse_course_records(text: &str) -> Result<Vec<(String, CourseOutcome)>, FeatureError> {
    const COLUMNS: [&str; 6] = [
        "studentId",
        "courseId",
        "creditHours",
        "gradeWeight",
        "registered",
        "passed",
    ];
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or(DatasetError::Empty)?;
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    if header != COLUMNS {
        return Err(FeatureError::Parse {
            line: 1,
            message: format!("expected header {}", COLUMNS.join(",")),
        });
    }

    let mut out = Vec::new();
    for (line, row) in lines {
        let cells: Vec<&str> = row.split(',').map(str::trim).collect();
        if cells.len() != COLUMNS.len() {
            return Err(DatasetError::Arity {
                line,
                expected: COLUMNS.len(),
                found: cells.len(),
            }
            .into());
        }
        let bad = |what: &str| FeatureError::Parse {
            line,
            message: format!("cannot parse {what}"),
        };
        let hours: f64 = cells[2].parse().map_err(|_| bad("creditHours"))?;
        let weight: f64 = cells[3].parse().map_err(|_| bad("gradeWeight"))?;
        let registered = parse_flag(cells[4]).ok_or_else(|| bad("registered"))?;
        let passed = parse_flag(cells[5]).ok_or_else(|| bad("passed"))?;
        let outcome = CourseOutcome::new(cells[1], hours, weight, registered, passed)?;
        out.push((cells[0].to_string(), outcome));
    }
    Ok(out)
}

/// Per-student numeric features from course records: registered, gained and
/// difference hours, GPA over registered courses and its band. A student with
/// no registered course gets missing GPA cells.
pub fn course_features(rows: &[(String, CourseOutcome)]) -> Result<Dataset, FeatureError> {
    let mut by_student: BTreeMap<&str, Vec<CourseOutcome>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for (sid, c) in rows {
        by_student
            .entry(sid.as_str())
            .or_insert_with(|| {
                order.push(sid.as_str());
                Vec::new()
            })
            .push(c.clone());
    }

    let bands = ["Below2", "Mid2to275", "Above275"];
    let schema = vec![
        AttributeSpec::nominal(SID, &order),
        AttributeSpec::numeric(TOTAL_REG),
        AttributeSpec::numeric(TOTAL_GAIN),
        AttributeSpec::numeric(DIFF),
        AttributeSpec::numeric(SEM_GPA),
        AttributeSpec::nominal("GPA_Band", &bands),
    ];
    let mut instances = Vec::with_capacity(order.len());
    for (i, sid) in order.iter().enumerate() {
        let courses = &by_student[sid];
        let registered: Vec<CourseOutcome> =
            courses.iter().filter(|c| c.registered).cloned().collect();
        let reg: f64 = registered.iter().map(|c| c.credit_hours).sum();
        let diff = credit_hour_difference(courses);
        let (gpa, band) = match semester_gpa(&registered) {
            Ok(g) => {
                let band = gpa_band(g)?;
                let bi = bands
                    .iter()
                    .position(|b| *b == band.to_string())
                    .unwrap_or(0);
                (Cell::Numeric(g), Cell::Nominal(bi))
            }
            Err(_) => (Cell::Missing, Cell::Missing),
        };
        instances.push(Instance::new(vec![
            Cell::Nominal(i),
            Cell::Numeric(reg),
            Cell::Numeric(reg - diff),
            Cell::Numeric(diff),
            gpa,
            band,
        ]));
    }
    if instances.is_empty() {
        return Err(FeatureError::NoRecords);
    }
    Ok(Dataset::new(schema, instances)?)
}
