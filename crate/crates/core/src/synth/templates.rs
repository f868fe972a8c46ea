//! Ellipse-based body templates for the eleven pose classes, in bed
//! coordinates (u across the bed, v head-to-foot, both in [0, 1]).

use crate::domain::PoseLabel;

/// One body part as a rotated ellipse with appearance, height and contact
/// load attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPart {
    pub cx: f64,
    pub cy: f64,
    /// Semi-axis along the part's local x (u when angle is 0).
    pub rx: f64,
    /// Semi-axis along the part's local y.
    pub ry: f64,
    /// CCW rotation in radians.
    pub angle: f64,
    pub albedo: f64,
    pub height: f64,
    pub load: f64,
}

impl BodyPart {
    /// Squared normalized radius at a bed point; <= 1 means inside.
    pub fn rho2(&self, u: f64, v: f64) -> f64 {
        let du = u - self.cx;
        let dv = v - self.cy;
        let (s, c) = self.angle.sin_cos();
        let lu = du * c + dv * s;
        let lv = -du * s + dv * c;
        (lu / self.rx).powi(2) + (lv / self.ry).powi(2)
    }

    fn mirrored(&self) -> BodyPart {
        BodyPart {
            cx: 1.0 - self.cx,
            angle: -self.angle,
            ..*self
        }
    }
}

/// Body layout for one pose. The background template has no parts; L/R pose
/// pairs are exact mirror images.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTemplate {
    pub label: PoseLabel,
    pub parts: Vec<BodyPart>,
}

impl PoseTemplate {
    /// Mirror across the bed's lengthwise centerline.
    pub fn mirrored_as(&self, label: PoseLabel) -> PoseTemplate {
        PoseTemplate {
            label,
            parts: self.parts.iter().map(BodyPart::mirrored).collect(),
        }
    }

    /// Apply an actor/session placement: scale about the bed pivot, rotate,
    /// then translate.
    pub fn instanced(&self, scale: f64, dx: f64, dy: f64, rot: f64) -> PoseTemplate {
        const PIVOT: (f64, f64) = (0.5, 0.52);
        let (s, c) = rot.sin_cos();
        let parts = self
            .parts
            .iter()
            .map(|p| {
                let ru = (p.cx - PIVOT.0) * scale;
                let rv = (p.cy - PIVOT.1) * scale;
                BodyPart {
                    cx: PIVOT.0 + ru * c - rv * s + dx,
                    cy: PIVOT.1 + ru * s + rv * c + dy,
                    rx: p.rx * scale,
                    ry: p.ry * scale,
                    angle: p.angle + rot,
                    ..*p
                }
            })
            .collect();
        PoseTemplate {
            label: self.label,
            parts,
        }
    }
}

fn deg(d: f64) -> f64 {
    d.to_radians()
}

fn part(
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    angle_deg: f64,
    albedo: f64,
    height: f64,
    load: f64,
) -> BodyPart {
    BodyPart {
        cx,
        cy,
        rx,
        ry,
        angle: deg(angle_deg),
        albedo,
        height,
        load,
    }
}

fn soldier_up() -> Vec<BodyPart> {
    // supine: load carried by the back, light legs
    vec![
        part(0.500, 0.130, 0.058, 0.055, 0.0, 0.85, 0.52, 0.55), // head
        part(0.500, 0.360, 0.150, 0.175, 0.0, 0.70, 0.58, 0.95), // torso
        part(0.500, 0.575, 0.125, 0.095, 0.0, 0.67, 0.52, 1.00), // pelvis
        part(0.320, 0.400, 0.040, 0.160, 0.0, 0.78, 0.38, 0.30), // arms at sides
        part(0.680, 0.400, 0.040, 0.160, 0.0, 0.78, 0.38, 0.30),
        part(0.435, 0.790, 0.050, 0.165, 0.0, 0.72, 0.44, 0.45), // legs
        part(0.565, 0.790, 0.050, 0.165, 0.0, 0.72, 0.44, 0.45),
    ]
}

fn soldier_down() -> Vec<BodyPart> {
    // prone: markedly flatter profile, arms raised beside the head, knees
    // and toes dig into the mat
    vec![
        part(0.500, 0.115, 0.050, 0.046, 0.0, 0.80, 0.40, 0.62),
        part(0.500, 0.360, 0.152, 0.175, 0.0, 0.72, 0.44, 0.80),
        part(0.500, 0.575, 0.125, 0.095, 0.0, 0.69, 0.46, 0.88),
        part(0.345, 0.175, 0.038, 0.135, 40.0, 0.78, 0.36, 0.40),
        part(0.655, 0.175, 0.038, 0.135, -40.0, 0.78, 0.36, 0.40),
        part(0.425, 0.800, 0.050, 0.165, 4.0, 0.72, 0.40, 0.95),
        part(0.575, 0.800, 0.050, 0.165, -4.0, 0.72, 0.40, 0.95),
    ]
}

fn faller_right() -> Vec<BodyPart> {
    // on the right side, shifted toward the foot end, arms folded low in
    // front, legs bent; hip carries most of the weight
    vec![
        part(0.515, 0.180, 0.050, 0.055, 0.0, 0.82, 0.60, 0.65),
        part(0.495, 0.410, 0.090, 0.170, 7.0, 0.68, 0.66, 0.95),
        part(0.505, 0.615, 0.082, 0.088, 0.0, 0.66, 0.66, 1.20),
        part(0.585, 0.360, 0.032, 0.095, 30.0, 0.77, 0.50, 0.50),
        part(0.625, 0.470, 0.030, 0.085, -25.0, 0.77, 0.48, 0.40),
        part(0.535, 0.830, 0.060, 0.145, 14.0, 0.70, 0.52, 0.70),
    ]
}

fn log_right() -> Vec<BodyPart> {
    // straight side pose, one arm along the front; stacked legs press hard
    vec![
        part(0.515, 0.140, 0.050, 0.055, 0.0, 0.82, 0.64, 0.65),
        part(0.500, 0.370, 0.090, 0.175, 0.0, 0.71, 0.70, 1.05),
        part(0.500, 0.580, 0.082, 0.090, 0.0, 0.68, 0.70, 1.10),
        part(0.582, 0.400, 0.032, 0.150, 0.0, 0.79, 0.54, 0.50),
        part(0.500, 0.805, 0.060, 0.160, 0.0, 0.73, 0.56, 1.15),
    ]
}

fn yearner_right() -> Vec<BodyPart> {
    // side pose shifted toward the head end, both arms stretched out in
    // front (toward +u); shoulder-heavy load
    vec![
        part(0.515, 0.115, 0.050, 0.055, 0.0, 0.84, 0.66, 0.65),
        part(0.480, 0.340, 0.090, 0.170, 0.0, 0.74, 0.74, 1.15),
        part(0.488, 0.550, 0.082, 0.090, 0.0, 0.70, 0.72, 0.85),
        part(0.660, 0.290, 0.115, 0.030, -6.0, 0.80, 0.56, 0.50),
        part(0.655, 0.405, 0.110, 0.028, 5.0, 0.80, 0.54, 0.40),
        part(0.492, 0.775, 0.060, 0.165, 0.0, 0.74, 0.58, 0.60),
    ]
}

fn fetal_right() -> Vec<BodyPart> {
    // tightly curled on the right side, knees drawn up, tallest profile;
    // load concentrated under pelvis and stacked thighs
    vec![
        part(0.545, 0.235, 0.050, 0.052, 18.0, 0.82, 0.68, 0.60),
        part(0.468, 0.415, 0.090, 0.150, 20.0, 0.66, 0.80, 0.90),
        part(0.462, 0.585, 0.084, 0.086, 0.0, 0.64, 0.78, 1.25),
        part(0.588, 0.640, 0.058, 0.118, 55.0, 0.72, 0.66, 1.30),
        part(0.645, 0.770, 0.052, 0.100, -30.0, 0.70, 0.56, 0.55),
        part(0.585, 0.385, 0.034, 0.100, 32.0, 0.78, 0.58, 0.45),
    ]
}

/// Templates for all eleven classes, indexed by label.
pub fn all_templates() -> Vec<PoseTemplate> {
    let faller_r = PoseTemplate {
        label: PoseLabel::FallerR,
        parts: faller_right(),
    };
    let log_r = PoseTemplate {
        label: PoseLabel::LogR,
        parts: log_right(),
    };
    let yearner_r = PoseTemplate {
        label: PoseLabel::YearnerR,
        parts: yearner_right(),
    };
    let fetal_r = PoseTemplate {
        label: PoseLabel::FetalR,
        parts: fetal_right(),
    };
    vec![
        PoseTemplate {
            label: PoseLabel::Background,
            parts: Vec::new(),
        },
        PoseTemplate {
            label: PoseLabel::SoldierU,
            parts: soldier_up(),
        },
        PoseTemplate {
            label: PoseLabel::SoldierD,
            parts: soldier_down(),
        },
        faller_r.clone(),
        faller_r.mirrored_as(PoseLabel::FallerL),
        log_r.clone(),
        log_r.mirrored_as(PoseLabel::LogL),
        yearner_r.clone(),
        yearner_r.mirrored_as(PoseLabel::YearnerL),
        fetal_r.clone(),
        fetal_r.mirrored_as(PoseLabel::FetalL),
    ]
}

/// Template for one pose label.
pub fn template_for(label: PoseLabel) -> PoseTemplate {
    all_templates()
        .into_iter()
        .find(|t| t.label == label)
        .expect("every label has a template")
}
