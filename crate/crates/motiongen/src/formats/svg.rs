//! Static SVG strips of skeleton poses in an orthographic front view.

use std::fmt::Write as _;

use motiongen_core::{JointPose, Skeleton};

use crate::error::{CliError, Result};

const PANEL: f64 = 160.0;
const MARGIN: f64 = 12.0;
const COLORS: [&str; 6] = ["#333333", "#c0392b", "#2471a3", "#d68910", "#1e8449", "#7d3c98"];

/// Frame indices shown for a motion of `frames` frames: 0, `every`, 2·`every`, ….
pub fn panel_frames(frames: usize, every: usize) -> Vec<usize> {
    (0..frames).step_by(every.max(1)).collect()
}

/// Screen coordinates: body-left to the right of the image, up is up.
fn project(p: &[f64; 3]) -> (f64, f64) {
    (-p[1], -p[0])
}

/// One panel per selected frame, all drawn at a common scale.
pub fn render_strip(frames: &[JointPose], skeleton: &Skeleton, every: usize) -> Result<String> {
    if frames.is_empty() {
        return Err(CliError::validation("cannot render an empty motion"));
    }
    if every == 0 {
        return Err(CliError::validation("frame step must be positive"));
    }
    if let Some(f) = frames.iter().find(|f| f.joints.len() != skeleton.joint_count()) {
        return Err(CliError::validation(format!(
            "frame has {} joints, skeleton `{}` has {}",
            f.joints.len(),
            skeleton.name(),
            skeleton.joint_count()
        )));
    }
    let picked = panel_frames(frames.len(), every);
    let centers: Vec<(f64, f64)> = picked.iter().map(|&i| project(&frames[i].joints[skeleton.root()])).collect();
    let mut extent: f64 = 1e-6;
    for (&i, c) in picked.iter().zip(&centers) {
        for j in &frames[i].joints {
            let (u, v) = project(j);
            extent = extent.max((u - c.0).abs()).max((v - c.1).abs());
        }
    }
    let scale = (PANEL / 2.0 - MARGIN) / extent;
    let width = PANEL * picked.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL:.0}" viewBox="0 0 {width:.0} {PANEL:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, (&i, c)) in picked.iter().zip(&centers).enumerate() {
        let ox = PANEL * k as f64 + PANEL / 2.0;
        let oy = PANEL / 2.0;
        let at = |p: &[f64; 3]| {
            let (u, v) = project(p);
            (ox + (u - c.0) * scale, oy + (v - c.1) * scale)
        };
        let _ = writeln!(out, r#"<g><title>frame {i}</title>"#);
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="0" width="{PANEL:.0}" height="{PANEL:.0}" fill="none" stroke="#dddddd"/>"##,
            PANEL * k as f64
        );
        let mut bone = 0;
        for (ci, chain) in skeleton.chains().iter().enumerate() {
            let color = COLORS[ci % COLORS.len()];
            for pair in chain.joints.windows(2) {
                let (a, b) = (at(&frames[i].joints[pair[0]]), at(&frames[i].joints[pair[1]]));
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="3" stroke-linecap="round"/>"#,
                    a.0, a.1, b.0, b.1
                );
                bone += 1;
            }
        }
        debug_assert_eq!(bone, skeleton.bone_count());
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{i}</text>"#,
            PANEL * k as f64 + 4.0,
            PANEL - 4.0
        );
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
