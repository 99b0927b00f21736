//! Trial files of raw digital counts and their conversion to physical units.
//!
//! Every channel of the acquisition kit reports an integer count in
//! `0..=999`. Joint potentiometers span 0–300°, the force-sensing resistor
//! converts at 9.8 N per 1000 counts, and the IMU channels map linearly onto
//! their symmetric full-scale range.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest legal digital count.
pub const MAX_COUNT: u16 = 999;

/// Degrees per count: the 0–999 count range spans the 0–300° potentiometer.
pub const DEFAULT_ANGLE_SCALE: f64 = 300.0 / 999.0;

/// Newtons per force count.
pub const FORCE_SCALE: f64 = 9.8 / 1000.0;

pub const DEFAULT_ACCEL_FULL_SCALE_G: f64 = 16.0;
pub const DEFAULT_GYRO_FULL_SCALE_DPS: f64 = 2000.0;
pub const DEFAULT_REST_WINDOW: usize = 10;

/// Documented sensitivity range of the force sensor (N).
pub const FORCE_SENSOR_RANGE_N: (f64, f64) = (0.0, 100.0);

const SUBJECT_HEADER: &str = "# subject,height_m,weight_kg,sex,handedness,age";
const CONDITION_HEADER: &str = "# condition,eyes,lunging,stance";
const RAW_COLUMNS: [&str; 14] = [
    "t", "rhip", "lhip", "rknee", "lknee", "rankle", "lankle", "force", "ax", "ay", "az", "gx",
    "gy", "gz",
];
const CONVERTED_COLUMNS: [&str; 14] = [
    "t",
    "rhip_deg",
    "lhip_deg",
    "rknee_deg",
    "lknee_deg",
    "rankle_deg",
    "lankle_deg",
    "force_N",
    "ax_g",
    "ay_g",
    "az_g",
    "gx_dps",
    "gy_dps",
    "gz_dps",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("trial has no samples")]
    Empty,
    #[error("rest window of {window} samples is invalid for a trial of {len} samples")]
    RestWindow { window: usize, len: usize },
    #[error("invalid subject metadata: {0}")]
    Subject(String),
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> IngestError {
    IngestError::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

macro_rules! text_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown {} `{}`", stringify!($name).to_lowercase(), other)),
                }
            }
        }
    };
}

text_enum!(Sex { Male => "male", Female => "female" });
text_enum!(Handedness { Left => "left", Right => "right", Unknown => "unknown" });
text_enum!(Eyes { Open => "open", Closed => "closed" });
text_enum!(Lunging { With => "with", Without => "without" });
text_enum!(Stance { Static => "static", Dynamic => "dynamic" });
text_enum!(Side { Left => "left", Right => "right" });
text_enum!(Joint { Hip => "hip", Knee => "knee", Ankle => "ankle" });

impl Handedness {
    pub fn mirrored(self) -> Self {
        match self {
            Handedness::Left => Handedness::Right,
            Handedness::Right => Handedness::Left,
            Handedness::Unknown => Handedness::Unknown,
        }
    }
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl Joint {
    pub const ALL: [Joint; 3] = [Joint::Hip, Joint::Knee, Joint::Ankle];
}

/// One of the six potentiometer channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub side: Side,
    pub joint: Joint,
}

impl Channel {
    /// Column order of the trial file: right/left pairs for hip, knee, ankle.
    pub const ALL: [Channel; 6] = [
        Channel {
            side: Side::Right,
            joint: Joint::Hip,
        },
        Channel {
            side: Side::Left,
            joint: Joint::Hip,
        },
        Channel {
            side: Side::Right,
            joint: Joint::Knee,
        },
        Channel {
            side: Side::Left,
            joint: Joint::Knee,
        },
        Channel {
            side: Side::Right,
            joint: Joint::Ankle,
        },
        Channel {
            side: Side::Left,
            joint: Joint::Ankle,
        },
    ];

    pub fn index(self) -> usize {
        let j = match self.joint {
            Joint::Hip => 0,
            Joint::Knee => 2,
            Joint::Ankle => 4,
        };
        j + usize::from(self.side == Side::Left)
    }

    /// Column index of the channel on the opposite leg.
    pub fn mirror_index(self) -> usize {
        Channel {
            side: self.side.opposite(),
            joint: self.joint,
        }
        .index()
    }

    pub fn name(self) -> String {
        format!("{}_{}", self.side, self.joint)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub id: String,
    pub height: f64,
    pub weight: f64,
    pub sex: Sex,
    pub handedness: Handedness,
    pub age: f64,
}

impl SubjectMeta {
    pub fn validate(&self) -> Result<(), IngestError> {
        for (name, v) in [
            ("height", self.height),
            ("weight", self.weight),
            ("age", self.age),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(IngestError::Subject(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.id.is_empty() || self.id.contains(',') || self.id.contains('\n') {
            return Err(IngestError::Subject(format!(
                "bad subject id `{}`",
                self.id
            )));
        }
        Ok(())
    }
}

impl Default for SubjectMeta {
    fn default() -> Self {
        Self {
            id: "S00".to_string(),
            height: 1.70,
            weight: 70.0,
            sex: Sex::Male,
            handedness: Handedness::Right,
            age: 25.0,
        }
    }
}

/// Push condition: eyes × lunging × stance, eight combinations in all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PushCondition {
    pub eyes: Eyes,
    pub lunging: Lunging,
    pub stance: Stance,
}

impl PushCondition {
    pub fn all() -> [PushCondition; 8] {
        let mut out = [PushCondition::default(); 8];
        let mut i = 0;
        for eyes in [Eyes::Open, Eyes::Closed] {
            for lunging in [Lunging::With, Lunging::Without] {
                for stance in [Stance::Static, Stance::Dynamic] {
                    out[i] = PushCondition {
                        eyes,
                        lunging,
                        stance,
                    };
                    i += 1;
                }
            }
        }
        out
    }

    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.eyes, self.lunging, self.stance)
    }
}

impl Default for PushCondition {
    fn default() -> Self {
        Self {
            eyes: Eyes::Closed,
            lunging: Lunging::Without,
            stance: Stance::Static,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub t: f64,
    /// rhip, lhip, rknee, lknee, rankle, lankle
    pub joint_counts: [u16; 6],
    pub force_count: u16,
    pub accel_counts: [u16; 3],
    pub gyro_counts: [u16; 3],
}

impl RawSample {
    pub fn zeros(t: f64) -> Self {
        Self {
            t,
            joint_counts: [0; 6],
            force_count: 0,
            accel_counts: [0; 3],
            gyro_counts: [0; 3],
        }
    }

    fn counts(&self) -> impl Iterator<Item = u16> + '_ {
        self.joint_counts
            .iter()
            .chain(std::iter::once(&self.force_count))
            .chain(self.accel_counts.iter())
            .chain(self.gyro_counts.iter())
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTrial {
    pub subject: SubjectMeta,
    pub condition: PushCondition,
    pub samples: Vec<RawSample>,
}

impl RawTrial {
    /// Checks timestamp ordering and count ranges.
    pub fn validate(&self) -> Result<(), IngestError> {
        self.subject.validate()?;
        let mut prev = f64::NEG_INFINITY;
        for (i, s) in self.samples.iter().enumerate() {
            let line = i + 6;
            if !s.t.is_finite() || s.t <= prev {
                return Err(parse_err(
                    line,
                    "t",
                    "timestamps must be finite and strictly increasing",
                ));
            }
            prev = s.t;
            for (col, c) in RAW_COLUMNS[1..].iter().zip(s.counts()) {
                if c > MAX_COUNT {
                    return Err(parse_err(line, col, format!("count {c} outside 0..=999")));
                }
            }
        }
        Ok(())
    }

    /// Mean sampling rate implied by the timestamps; `None` for fewer than two samples.
    pub fn sample_rate(&self) -> Option<f64> {
        sample_rate(&self.samples.iter().map(|s| s.t).collect::<Vec<_>>())
    }

    /// Swap every left/right channel pair; handedness is mirrored with it.
    pub fn mirrored(&self) -> RawTrial {
        let mut out = self.clone();
        out.subject.handedness = self.subject.handedness.mirrored();
        for s in &mut out.samples {
            let orig = s.joint_counts;
            for ch in Channel::ALL {
                s.joint_counts[ch.index()] = orig[ch.mirror_index()];
            }
        }
        out
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

pub(crate) fn sample_rate(t: &[f64]) -> Option<f64> {
    match t {
        [first, .., last] => Some((t.len() - 1) as f64 / (last - first)),
        _ => None,
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

struct Preamble {
    subject: SubjectMeta,
    condition: PushCondition,
}

fn parse_preamble(lines: &[&str]) -> Result<Preamble, IngestError> {
    let get = |i: usize, what: &str| -> Result<&str, IngestError> {
        lines
            .get(i)
            .copied()
            .ok_or_else(|| parse_err(i + 1, what, "unexpected end of file"))
    };
    let header = get(0, "header")?;
    if split_fields(header) != split_fields(SUBJECT_HEADER) {
        return Err(parse_err(
            1,
            "header",
            format!("expected `{SUBJECT_HEADER}`"),
        ));
    }
    let meta = split_fields(get(1, "subject")?);
    if meta.len() != 6 {
        return Err(parse_err(
            2,
            "subject",
            format!("expected 6 fields, found {}", meta.len()),
        ));
    }
    let num = |idx: usize, name: &str| -> Result<f64, IngestError> {
        let v: f64 = meta[idx]
            .parse()
            .map_err(|_| parse_err(2, name, format!("`{}` is not a number", meta[idx])))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(parse_err(2, name, "must be positive"));
        }
        Ok(v)
    };
    let subject = SubjectMeta {
        id: meta[0].to_string(),
        height: num(1, "height_m")?,
        weight: num(2, "weight_kg")?,
        sex: meta[3].parse().map_err(|e| parse_err(2, "sex", e))?,
        handedness: meta[4].parse().map_err(|e| parse_err(2, "handedness", e))?,
        age: num(5, "age")?,
    };
    if subject.id.is_empty() {
        return Err(parse_err(2, "subject", "empty subject id"));
    }
    if split_fields(get(2, "header")?) != split_fields(CONDITION_HEADER) {
        return Err(parse_err(
            3,
            "header",
            format!("expected `{CONDITION_HEADER}`"),
        ));
    }
    let cond = split_fields(get(3, "condition")?);
    if cond.len() != 4 {
        return Err(parse_err(
            4,
            "condition",
            format!("expected 4 fields, found {}", cond.len()),
        ));
    }
    let condition = PushCondition {
        eyes: cond[1].parse().map_err(|e| parse_err(4, "eyes", e))?,
        lunging: cond[2].parse().map_err(|e| parse_err(4, "lunging", e))?,
        stance: cond[3].parse().map_err(|e| parse_err(4, "stance", e))?,
    };
    Ok(Preamble { subject, condition })
}

fn write_preamble(out: &mut String, subject: &SubjectMeta, condition: &PushCondition) {
    use std::fmt::Write;
    let _ = writeln!(out, "{SUBJECT_HEADER}");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        subject.id, subject.height, subject.weight, subject.sex, subject.handedness, subject.age
    );
    let _ = writeln!(out, "{CONDITION_HEADER}");
    let _ = writeln!(
        out,
        "{},{},{},{}",
        condition.label(),
        condition.eyes,
        condition.lunging,
        condition.stance
    );
}

fn data_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .collect()
}

/// Parse a raw trial file.
pub fn parse_trial(text: &str) -> Result<RawTrial, IngestError> {
    let lines = data_lines(text);
    if lines.iter().all(|(_, l)| l.trim().is_empty()) {
        return Err(parse_err(1, "header", "empty file"));
    }
    let plain: Vec<&str> = lines.iter().map(|(_, l)| *l).collect();
    let Preamble { subject, condition } = parse_preamble(&plain)?;
    let header = plain
        .get(4)
        .ok_or_else(|| parse_err(5, "header", "missing column header"))?;
    if split_fields(header) != RAW_COLUMNS {
        return Err(parse_err(
            5,
            "header",
            format!("expected `{}`", RAW_COLUMNS.join(",")),
        ));
    }

    let mut samples = Vec::new();
    let mut prev_t = f64::NEG_INFINITY;
    for &(lineno, line) in &lines[5..] {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if fields.len() != RAW_COLUMNS.len() {
            return Err(parse_err(
                lineno,
                "row",
                format!(
                    "expected {} fields, found {}",
                    RAW_COLUMNS.len(),
                    fields.len()
                ),
            ));
        }
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno, "t", format!("`{}` is not a number", fields[0])))?;
        if !t.is_finite() {
            return Err(parse_err(lineno, "t", "timestamp is not finite"));
        }
        if t <= prev_t {
            return Err(parse_err(
                lineno,
                "t",
                format!("timestamp {t} does not increase"),
            ));
        }
        prev_t = t;
        let mut counts = [0u16; 13];
        for (k, slot) in counts.iter_mut().enumerate() {
            let name = RAW_COLUMNS[k + 1];
            let raw = fields[k + 1];
            let v: i64 = raw
                .parse()
                .map_err(|_| parse_err(lineno, name, format!("`{raw}` is not an integer count")))?;
            if !(0..=i64::from(MAX_COUNT)).contains(&v) {
                return Err(parse_err(
                    lineno,
                    name,
                    format!("count {v} outside 0..=999"),
                ));
            }
            *slot = v as u16;
        }
        samples.push(RawSample {
            t,
            joint_counts: counts[0..6].try_into().unwrap(),
            force_count: counts[6],
            accel_counts: counts[7..10].try_into().unwrap(),
            gyro_counts: counts[10..13].try_into().unwrap(),
        });
    }
    Ok(RawTrial {
        subject,
        condition,
        samples,
    })
}

/// Serialize a trial in the raw file layout; inverse of [`parse_trial`].
pub fn serialize_trial(trial: &RawTrial) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    write_preamble(&mut out, &trial.subject, &trial.condition);
    let _ = writeln!(out, "{}", RAW_COLUMNS.join(","));
    for s in &trial.samples {
        let _ = write!(out, "{}", s.t);
        for c in s.counts() {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

/// Zero-corrected angle change in degrees.
pub fn counts_to_angle(theta: f64, theta0: f64, scale: f64) -> f64 {
    (theta - theta0) * scale
}

pub fn counts_to_force(f: f64) -> f64 {
    f * FORCE_SCALE
}

/// Linear map of a count onto `[-full_scale, +full_scale]`.
pub fn counts_to_imu(count: f64, full_scale: f64) -> f64 {
    -full_scale + 2.0 * full_scale * count / f64::from(MAX_COUNT)
}

/// Rest counts per joint channel: the mean over the leading `rest_window` samples.
pub fn zero_correct(trial: &RawTrial, rest_window: usize) -> Result<[f64; 6], IngestError> {
    let len = trial.samples.len();
    if len == 0 {
        return Err(IngestError::Empty);
    }
    if rest_window == 0 || rest_window > len {
        return Err(IngestError::RestWindow {
            window: rest_window,
            len,
        });
    }
    let mut theta0 = [0.0; 6];
    for s in &trial.samples[..rest_window] {
        for (acc, &c) in theta0.iter_mut().zip(&s.joint_counts) {
            *acc += f64::from(c);
        }
    }
    for v in &mut theta0 {
        *v /= rest_window as f64;
    }
    Ok(theta0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionConfig {
    pub angle_scale: f64,
    pub accel_full_scale_g: f64,
    pub gyro_full_scale_dps: f64,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        Self {
            angle_scale: DEFAULT_ANGLE_SCALE,
            accel_full_scale_g: DEFAULT_ACCEL_FULL_SCALE_G,
            gyro_full_scale_dps: DEFAULT_GYRO_FULL_SCALE_DPS,
        }
    }
}

/// Zero-corrected angle change (Θ − Θ0) over time for one joint channel.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSeries {
    pub joint: Joint,
    pub side: Side,
    pub t: Vec<f64>,
    pub angle: Vec<f64>,
}

impl JointSeries {
    pub fn channel(&self) -> Channel {
        Channel {
            side: self.side,
            joint: self.joint,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceSeries {
    pub t: Vec<f64>,
    pub force: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImuSeries {
    pub t: Vec<f64>,
    /// g-units
    pub accel: Vec<[f64; 3]>,
    /// degrees per second
    pub gyro: Vec<[f64; 3]>,
}

/// A trial in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvertedTrial {
    pub subject: SubjectMeta,
    pub condition: PushCondition,
    /// Six joint series in [`Channel::ALL`] order.
    pub joints: Vec<JointSeries>,
    pub force: ForceSeries,
    pub imu: ImuSeries,
}

impl ConvertedTrial {
    pub fn joint(&self, channel: Channel) -> &JointSeries {
        &self.joints[channel.index()]
    }

    pub fn times(&self) -> &[f64] {
        &self.force.t
    }
}

pub fn convert_trial(
    trial: &RawTrial,
    theta0: &[f64; 6],
    config: &ConversionConfig,
) -> Result<ConvertedTrial, IngestError> {
    trial.validate()?;
    let t = trial.times();
    let joints = Channel::ALL
        .iter()
        .map(|ch| JointSeries {
            joint: ch.joint,
            side: ch.side,
            t: t.clone(),
            angle: trial
                .samples
                .iter()
                .map(|s| {
                    counts_to_angle(
                        f64::from(s.joint_counts[ch.index()]),
                        theta0[ch.index()],
                        config.angle_scale,
                    )
                })
                .collect(),
        })
        .collect();
    let force = ForceSeries {
        t: t.clone(),
        force: trial
            .samples
            .iter()
            .map(|s| counts_to_force(f64::from(s.force_count)))
            .collect(),
    };
    let imu3 = |c: &[u16; 3], fs: f64| c.map(|v| counts_to_imu(f64::from(v), fs));
    let imu = ImuSeries {
        t,
        accel: trial
            .samples
            .iter()
            .map(|s| imu3(&s.accel_counts, config.accel_full_scale_g))
            .collect(),
        gyro: trial
            .samples
            .iter()
            .map(|s| imu3(&s.gyro_counts, config.gyro_full_scale_dps))
            .collect(),
    };
    Ok(ConvertedTrial {
        subject: trial.subject.clone(),
        condition: trial.condition,
        joints,
        force,
        imu,
    })
}

/// Zero-correct over the leading rest window, then convert.
pub fn ingest(
    trial: &RawTrial,
    rest_window: usize,
    config: &ConversionConfig,
) -> Result<ConvertedTrial, IngestError> {
    let theta0 = zero_correct(trial, rest_window)?;
    convert_trial(trial, &theta0, config)
}

/// True when the text carries the converted-unit column header.
pub fn is_converted(text: &str) -> bool {
    text.lines()
        .nth(4)
        .map(|h| split_fields(h.trim_end_matches('\r')) == CONVERTED_COLUMNS)
        .unwrap_or(false)
}

pub fn raw_columns() -> &'static [&'static str] {
    &RAW_COLUMNS
}

pub fn converted_columns() -> &'static [&'static str] {
    &CONVERTED_COLUMNS
}

/// Serialize converted data: raw layout with unit-suffixed headers, six decimals.
pub fn serialize_converted(trial: &ConvertedTrial) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    write_preamble(&mut out, &trial.subject, &trial.condition);
    let _ = writeln!(out, "{}", CONVERTED_COLUMNS.join(","));
    for (i, t) in trial.times().iter().enumerate() {
        let _ = write!(out, "{t:.6}");
        for j in &trial.joints {
            let _ = write!(out, ",{:.6}", j.angle[i]);
        }
        let _ = write!(out, ",{:.6}", trial.force.force[i]);
        for v in trial.imu.accel[i].iter().chain(trial.imu.gyro[i].iter()) {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_converted(text: &str) -> Result<ConvertedTrial, IngestError> {
    let lines = data_lines(text);
    if lines.iter().all(|(_, l)| l.trim().is_empty()) {
        return Err(parse_err(1, "header", "empty file"));
    }
    let plain: Vec<&str> = lines.iter().map(|(_, l)| *l).collect();
    let Preamble { subject, condition } = parse_preamble(&plain)?;
    let header = plain
        .get(4)
        .ok_or_else(|| parse_err(5, "header", "missing column header"))?;
    if split_fields(header) != CONVERTED_COLUMNS {
        return Err(parse_err(
            5,
            "header",
            format!("expected `{}`", CONVERTED_COLUMNS.join(",")),
        ));
    }
    let mut rows: Vec<[f64; 14]> = Vec::new();
    for &(lineno, line) in &lines[5..] {
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line);
        if fields.len() != 14 {
            return Err(parse_err(
                lineno,
                "row",
                format!("expected 14 fields, found {}", fields.len()),
            ));
        }
        let mut row = [0.0; 14];
        for (k, slot) in row.iter_mut().enumerate() {
            let v: f64 = fields[k].parse().map_err(|_| {
                parse_err(
                    lineno,
                    CONVERTED_COLUMNS[k],
                    format!("`{}` is not a number", fields[k]),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    lineno,
                    CONVERTED_COLUMNS[k],
                    "value is not finite",
                ));
            }
            *slot = v;
        }
        if let Some(prev) = rows.last() {
            if row[0] <= prev[0] {
                return Err(parse_err(
                    lineno,
                    "t",
                    format!("timestamp {} does not increase", row[0]),
                ));
            }
        }
        rows.push(row);
    }
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let joints = Channel::ALL
        .iter()
        .map(|ch| JointSeries {
            joint: ch.joint,
            side: ch.side,
            t: t.clone(),
            angle: col(1 + ch.index()),
        })
        .collect();
    Ok(ConvertedTrial {
        subject,
        condition,
        joints,
        force: ForceSeries {
            t: t.clone(),
            force: col(7),
        },
        imu: ImuSeries {
            t,
            accel: rows.iter().map(|r| [r[8], r[9], r[10]]).collect(),
            gyro: rows.iter().map(|r| [r[11], r[12], r[13]]).collect(),
        },
    })
}
