//! Artifact serialization. Every float is written with 17 significant digits
//! so that repeated runs can be compared byte for byte.

use std::fmt::Write as _;
use std::io;

use possync_core::{SyncMetrics, Trajectory};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// `t,agent,coord,value` rows; `t` has 6 fractional digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.agent_dim;
    let mut out = String::from("t,agent,coord,value\n");
    for (t, state) in traj.times.iter().zip(&traj.states) {
        for (idx, v) in state.iter().enumerate() {
            writeln!(out, "{t:.6},{},{},{v:.16e}", idx / n, idx % n)
                .expect("writing to a String cannot fail");
        }
    }
    out
}

/// Pretty JSON whose numbers carry 17 significant digits.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("artifact types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[derive(Debug, Serialize)]
pub struct MetricsJson<'a> {
    pub times: &'a [f64],
    pub disagreement: &'a [f64],
    pub min_coordinate: &'a [f64],
    pub sync_error_vs_reference: &'a [f64],
    pub half_life: Option<f64>,
}

impl<'a> From<&'a SyncMetrics> for MetricsJson<'a> {
    fn from(m: &'a SyncMetrics) -> Self {
        Self {
            times: &m.times,
            disagreement: &m.disagreement,
            min_coordinate: &m.min_coordinate,
            sync_error_vs_reference: &m.sync_error_vs_reference,
            half_life: m.half_life,
        }
    }
}
