//! Histogram and series file readers.

use std::fs;
use std::path::Path;

use crate::bench::units::SotaSeries;
use crate::dms::Pmf;
use crate::error::{Error, Result};

/// Parses `label,count` lines into a normalized distribution. Blank lines
/// and `#` comments are skipped. Repeated labels accumulate; label order is
/// the order of first appearance.
pub fn parse_pmf(text: &str, source_name: &str) -> Result<Pmf> {
    let err = |line: usize, msg: String| Error::Load {
        path: source_name.to_string(),
        line,
        msg,
    };
    let mut labels: Vec<String> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (label, count) = line
            .rsplit_once(',')
            .ok_or_else(|| err(line_no, format!("expected `label,count`, got `{line}`")))?;
        let label = label.trim();
        let count = count.trim();
        if label.is_empty() {
            return Err(err(line_no, "empty label".into()));
        }
        if count.starts_with('-') {
            return Err(err(line_no, format!("negative count `{count}`")));
        }
        let count: u64 = count.parse().map_err(|_| {
            err(
                line_no,
                format!("count `{count}` is not a non-negative integer"),
            )
        })?;
        match labels.iter().position(|l| l == label) {
            Some(i) => {
                counts[i] = counts[i]
                    .checked_add(count)
                    .ok_or_else(|| err(line_no, "count overflow".into()))?
            }
            None => {
                labels.push(label.to_string());
                counts.push(count);
            }
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(err(last_line, "no positive counts".into()));
    }
    let pmf = Pmf::from_counts(&counts)?;
    Pmf::with_labels(pmf.probs().to_vec(), labels)
}

pub fn load_pmf(path: impl AsRef<Path>) -> Result<Pmf> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_pmf(&text, &path.display().to_string())
}

pub fn parse_sota(text: &str) -> Result<SotaSeries> {
    let series: SotaSeries = serde_json::from_str(text)?;
    series.validate()?;
    Ok(series)
}

pub fn load_sota(path: impl AsRef<Path>) -> Result<SotaSeries> {
    parse_sota(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::units::{to_bits_per_image, Metric, RateUnit, Resolution};

    #[test]
    fn pmf_examples() {
        let p = parse_pmf("a,1\nb,1\nc,2\n", "h").unwrap();
        assert_eq!(p.probs(), &[0.25, 0.25, 0.5]);
        assert_eq!(p.labels().unwrap(), &["a", "b", "c"]);

        let p = parse_pmf("x,5", "h").unwrap();
        assert_eq!(p.probs(), &[1.0]);

        let text: String = (0..40).map(|i| format!("class{i},25\n")).collect();
        let p = parse_pmf(&text, "h").unwrap();
        assert_eq!(p.len(), 40);
        assert!(p.is_uniform());
    }

    #[test]
    fn comments_blanks_and_repeats() {
        let p = parse_pmf("# header\n\nb , 3  # trailing\na,1\nb,0\n", "h").unwrap();
        assert_eq!(p.labels().unwrap(), &["b", "a"]);
        assert_eq!(p.probs(), &[0.75, 0.25]);
        let p = parse_pmf("a,1\nb,0\na,1\n", "h").unwrap();
        assert_eq!(p.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn pmf_errors_carry_line_numbers() {
        let line_of = |text: &str| match parse_pmf(text, "h") {
            Err(Error::Load { line, .. }) => line,
            other => panic!("expected load error, got {other:?}"),
        };
        assert_eq!(line_of("a,1\nbogus\n"), 2);
        assert_eq!(line_of("a,1\n# c\nb,-3\n"), 3);
        assert_eq!(line_of("a,1.5\n"), 1);
        assert_eq!(line_of(",4\n"), 1);
        assert_eq!(line_of("a,0\nb,0\n"), 2);
        assert_eq!(line_of(""), 0);
    }

    #[test]
    fn sota_examples() {
        let s = parse_sota(
            r#"{"dataset":"MNIST","method":"VIC","unit":"bits_per_image","points":[{"rate":5.7,"accuracy":0.991}]}"#,
        )
        .unwrap();
        assert_eq!(s.points[0].rate, 5.7);
        assert_eq!(s.metric, Metric::Accuracy);
        assert_eq!(s.resolution, None);

        let s = parse_sota(
            r#"{"dataset":"ModelNet40","method":"m","unit":"bits_per_point","resolution":{"points":1024},
                "points":[{"rate":0.1,"accuracy":0.9}]}"#,
        )
        .unwrap();
        assert_eq!(s.resolution, Some(Resolution::PointCloud { points: 1024 }));
        assert!((to_bits_per_image(&s).unwrap().points[0].rate - 102.4).abs() < 1e-12);

        let s = parse_sota(
            r#"{"dataset":"ImageNet","method":"m","unit":"bits_per_pixel","resolution":{"width":224,"height":224},
                "points":[{"rate":0.01,"accuracy":0.7}]}"#,
        )
        .unwrap();
        assert_eq!(s.unit, RateUnit::BitsPerPixel);
        assert!((to_bits_per_image(&s).unwrap().points[0].rate - 501.76).abs() < 1e-9);

        let s = parse_sota(
            r#"{"dataset":"COCO","method":"m","unit":"bits_per_pixel","metric":"mAP",
                "resolution":{"width":640,"height":480},"points":[{"rate":0.5,"accuracy":0.555}]}"#,
        )
        .unwrap();
        assert_eq!(s.metric, Metric::Map);
    }

    #[test]
    fn sota_errors() {
        assert!(matches!(
            parse_sota(
                r#"{"dataset":"d","method":"m","unit":"bits_per_pixel","points":[{"rate":1,"accuracy":0.5}]}"#
            ),
            Err(Error::InvalidSeries(_))
        ));
        assert!(matches!(
            parse_sota(
                r#"{"dataset":"d","method":"m","unit":"bits_per_image","points":[{"rate":1,"accuracy":1.5}]}"#
            ),
            Err(Error::InvalidSeries(_))
        ));
        assert!(matches!(parse_sota("{"), Err(Error::Json(_))));
        assert!(
            parse_sota(r#"{"dataset":"d","method":"m","unit":"furlongs","points":[]}"#).is_err()
        );
    }
}
