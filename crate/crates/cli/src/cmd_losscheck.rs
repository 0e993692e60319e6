//! `detkit losscheck`: evaluate one loss kernel on flag-supplied inputs
//! and print its value, analytic gradient, central finite-difference
//! gradient, and the worst relative error between the two. The numeric
//! debug surface for comparing this implementation against others.

use clap::{Args, Subcommand};
use detkit::config::RunConfig;
use detkit::geometry::{ciou_loss, ciou_loss_gradient, BBox};
use detkit::loss::{
    bce_with_logits, bce_with_logits_gradient, finite_difference_gradient, focal_loss,
    focal_loss_gradient, quality_focal_loss, quality_focal_loss_gradient, smooth_labels,
    smooth_labels_gradient, BCEInputs, FocalParams, QFLParams, Reduction, SmoothingParams,
};
use detkit::{Error, Result};

const FD_EPS: f64 = 1e-6;

#[derive(Args, Debug)]
#[command(after_help = RunConfig::help_block())]
pub struct LosscheckArgs {
    #[command(subcommand)]
    pub kernel: Kernel,
}

#[derive(Subcommand, Debug)]
pub enum Kernel {
    /// Binary cross-entropy on a logit
    Bce {
        /// Logit
        #[arg(long)]
        x: f64,
        /// Target in [0, 1]
        #[arg(long)]
        y: f64,
        /// Element weight
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        /// Positive-class weight
        #[arg(long, default_value_t = 1.0)]
        pc: f64,
    },
    /// Focal loss on a probability
    Focal {
        /// Predicted probability in [0, 1]
        #[arg(long)]
        p: f64,
        /// Binary target, 0 or 1
        #[arg(long)]
        y: u8,
        /// Class balance weight
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        /// Focusing exponent
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
    },
    /// Quality focal loss on a sigmoid score
    Qfl {
        /// Predicted sigmoid score in [0, 1]
        #[arg(long)]
        sigma: f64,
        /// Quality target in [0, 1]
        #[arg(long)]
        y: f64,
        /// Modulation exponent
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
    },
    /// Label smoothing of a binary target
    Smooth {
        /// Binary target, 0 or 1
        #[arg(long)]
        y: f64,
        /// Smoothing strength in [0, 1]
        #[arg(long, default_value_t = 0.1)]
        ls: f64,
    },
    /// Complete-IoU loss between two corner-format boxes
    Ciou {
        /// Predicted box as x0,y0,x1,y1
        #[arg(long, value_name = "X0,Y0,X1,Y1")]
        b: String,
        /// Ground-truth box as x0,y0,x1,y1
        #[arg(long, value_name = "X0,Y0,X1,Y1")]
        gt: String,
    },
}

pub fn run(args: &LosscheckArgs) -> Result<()> {
    let (value, gradient, fd) = match &args.kernel {
        Kernel::Bce { x, y, w, pc } => {
            let inputs = BCEInputs::scalar(*x, *y, *w, *pc)?;
            let value = bce_with_logits(&inputs, Reduction::Sum)?
                .scalar()
                .expect("sum reduction is scalar");
            let gradient = bce_with_logits_gradient(&inputs);
            let (y, w, pc) = (*y, *w, *pc);
            let fd = finite_difference_gradient(
                |pt| match BCEInputs::scalar(pt[0], y, w, pc) {
                    Ok(i) => bce_with_logits(&i, Reduction::Sum)
                        .ok()
                        .and_then(|v| v.scalar())
                        .unwrap_or(f64::NAN),
                    Err(_) => f64::NAN,
                },
                &[*x],
                FD_EPS,
            );
            (value, gradient, fd)
        }
        Kernel::Focal { p, y, alpha, gamma } => {
            let positive = parse_binary(*y as f64)?;
            let params = FocalParams::new(*alpha, *gamma)?;
            let value = focal_loss(*p, positive, &params)?;
            let gradient = vec![focal_loss_gradient(*p, positive, &params)?];
            let fd = finite_difference_gradient(
                |pt| focal_loss(pt[0], positive, &params).unwrap_or(f64::NAN),
                &[*p],
                FD_EPS,
            );
            (value, gradient, fd)
        }
        Kernel::Qfl { sigma, y, beta } => {
            let params = QFLParams::new(*beta)?;
            let value = quality_focal_loss(*sigma, *y, &params)?;
            let gradient = vec![quality_focal_loss_gradient(*sigma, *y, &params)?];
            let y = *y;
            let fd = finite_difference_gradient(
                |pt| quality_focal_loss(pt[0], y, &params).unwrap_or(f64::NAN),
                &[*sigma],
                FD_EPS,
            );
            (value, gradient, fd)
        }
        Kernel::Smooth { y, ls } => {
            parse_binary(*y)?;
            let params = SmoothingParams::new(*ls)?;
            let value = smooth_labels(*y, &params);
            let gradient = vec![smooth_labels_gradient(&params)];
            // The smoothed label is linear in y, so the probe may leave
            // {0, 1} without leaving the kernel's domain.
            let fd = finite_difference_gradient(
                |pt| smooth_labels(pt[0], &params),
                &[*y],
                FD_EPS,
            );
            (value, gradient, fd)
        }
        Kernel::Ciou { b, gt } => {
            let b = parse_box(b)?;
            let gt = parse_box(gt)?;
            let value = ciou_loss(&b, &gt);
            let gradient = ciou_loss_gradient(&b, &gt).to_vec();
            let fd = finite_difference_gradient(
                |pt| {
                    if pt[0] > pt[2] || pt[1] > pt[3] {
                        f64::NAN
                    } else {
                        ciou_loss(&BBox::new(pt[0], pt[1], pt[2], pt[3]), &gt)
                    }
                },
                &[b.x_min, b.y_min, b.x_max, b.y_max],
                FD_EPS,
            );
            (value, gradient, fd)
        }
    };

    println!("value={}", canonical(value));
    println!("gradient={}", join(&gradient));
    match fd {
        Ok(fd) => {
            println!("fd_gradient={}", join(&fd));
            let worst = gradient
                .iter()
                .zip(&fd)
                .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(1e-12))
                .fold(0.0, f64::max);
            println!("max_rel_err={worst:e}");
        }
        Err(e) => {
            println!("fd_gradient=unavailable ({e})");
            println!("max_rel_err=unavailable");
        }
    }
    Ok(())
}

/// Collapse IEEE negative zero so boundary cases print as plain `0`.
fn canonical(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| canonical(*v).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_binary(y: f64) -> Result<bool> {
    match y {
        v if v == 0.0 => Ok(false),
        v if v == 1.0 => Ok(true),
        other => Err(Error::invalid(format!("--y must be 0 or 1, got {other}"))),
    }
}

fn parse_box(text: &str) -> Result<BBox> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::invalid(format!(
            "expected a box as x0,y0,x1,y1, got {text:?}"
        )));
    }
    let mut c = [0.0f64; 4];
    for (slot, part) in c.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::invalid(format!("cannot parse {part:?} as a number")))?;
    }
    if c[0] > c[2] || c[1] > c[3] {
        return Err(Error::invalid(format!(
            "box corners are inverted in {text:?}"
        )));
    }
    Ok(BBox::new(c[0], c[1], c[2], c[3]))
}
