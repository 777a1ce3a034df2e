use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Seventeen significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Flag,
    Env,
    Config,
    Default,
}

impl SeedSource {
    pub fn name(self) -> &'static str {
        match self {
            SeedSource::Flag => "flag",
            SeedSource::Env => "env",
            SeedSource::Config => "config",
            SeedSource::Default => "default",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed {
    pub value: u64,
    pub source: SeedSource,
}

impl Seed {
    pub fn comment(&self) -> String {
        format!("# seed={} source={}\n", self.value, self.source.name())
    }
}

/// A CSV table built in memory and written in one go.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(seed: Option<Seed>, header: &[&str]) -> Self {
        let mut text = seed.map(|s| s.comment()).unwrap_or_default();
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Files produced by one command, written only after the command succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    /// Writes each file through a temporary name so a failed run leaves no
    /// partial file behind.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            fs::write(&tmp, contents)?;
            fs::rename(&tmp, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.5e-300), "-2.5000000000000000e-300");
        let x = 0.1f64 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let seed = Seed {
            value: 7,
            source: SeedSource::Env,
        };
        let mut c = Csv::new(Some(seed), &["t", "x"]);
        c.row(&[num(0.0), num(1.0)]);
        assert_eq!(
            c.finish(),
            "# seed=7 source=env\nt,x\n0.0000000000000000e0,1.0000000000000000e0\n"
        );
    }

    #[test]
    fn writes_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::default();
        o.add("a.csv", "x\n".into());
        let paths = o.write(&dir.path().join("sub")).unwrap();
        assert_eq!(fs::read_to_string(&paths[0]).unwrap(), "x\n");
        assert_eq!(fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }
}
