//! CSV encodings: `t,value` for grid paths and `jump_time,jump_size` for step
//! paths. Reading validates the same invariants as the constructors.

use std::io::{Read, Write};

use super::{GridPath, StepPath};
use crate::error::{Error, Result};

impl GridPath {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "value"])?;
        for (i, v) in self.values().iter().enumerate() {
            out.write_record([self.time(i).to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(rdr.headers()?, &["t", "value"])?;
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for rec in rdr.deserialize::<(f64, f64)>() {
            let (t, v) = rec?;
            ts.push(t);
            vs.push(v);
        }
        let t0 = *ts.first().ok_or_else(|| Error::domain("empty grid path CSV"))?;
        let dt = if ts.len() > 1 { ts[1] - t0 } else { 1.0 };
        for (i, t) in ts.iter().enumerate() {
            let expect = t0 + i as f64 * dt;
            if (t - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
                return Err(Error::domain(format!("non-uniform grid at row {i}")));
            }
        }
        GridPath::new(t0, dt, vs)
    }
}

impl StepPath {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["jump_time", "jump_size"])?;
        for (t, s) in self.jump_times().iter().zip(self.jump_sizes()) {
            out.write_record([t.to_string(), s.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// The window is not part of the encoding and must be supplied.
    pub fn read_csv<R: Read>(r: R, window: (f64, f64)) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(rdr.headers()?, &["jump_time", "jump_size"])?;
        let mut ts = Vec::new();
        let mut ss = Vec::new();
        for rec in rdr.deserialize::<(f64, f64)>() {
            let (t, s) = rec?;
            ts.push(t);
            ss.push(s);
        }
        StepPath::new(window.0, window.1, ts, ss)
    }
}

fn check_header(h: &csv::StringRecord, want: &[&str]) -> Result<()> {
    if h.iter().eq(want.iter().copied()) {
        Ok(())
    } else {
        Err(Error::domain(format!("expected CSV header {}, got {}", want.join(","), h.iter().collect::<Vec<_>>().join(","))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_header_and_rows() {
        let p = GridPath::new(0.0, 0.5, vec![0.0, 1.5, -2.0]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "t,value\n0,0\n0.5,1.5\n1,-2\n");
        assert_eq!(GridPath::read_csv(&buf[..]).unwrap(), p);
    }

    #[test]
    fn rejects_invalid_csv() {
        assert!(GridPath::read_csv("t,value\n0,1\n".as_bytes()).is_err());
        assert!(GridPath::read_csv("t,value\n0,0\n1,1\n3,2\n".as_bytes()).is_err());
        assert!(GridPath::read_csv("time,value\n0,0\n".as_bytes()).is_err());
        assert!(StepPath::read_csv("jump_time,jump_size\n2,1\n1,1\n".as_bytes(), (0.0, 5.0)).is_err());
        assert!(StepPath::read_csv("jump_time,jump_size\n6,1\n".as_bytes(), (0.0, 5.0)).is_err());
    }

    proptest! {
        #[test]
        fn step_roundtrip(set in prop::collection::btree_set(1u32..10_000, 0..30)) {
            let times: Vec<f64> = set.into_iter().map(|k| k as f64 * 0.001).collect();
            let p = StepPath::counting(0.0, 10.0, times).unwrap();
            let mut buf = Vec::new();
            p.write_csv(&mut buf).unwrap();
            prop_assert_eq!(StepPath::read_csv(&buf[..], (0.0, 10.0)).unwrap(), p);
        }
    }
}
