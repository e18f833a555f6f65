use georhythm::spherelets::{CellState, PointCloud, SurfaceAtlas};
use nalgebra::Vector3;

fn two_bumps(x: f64, y: f64) -> f64 {
    0.5 * (-((x + 0.25).powi(2) + (y + 0.15).powi(2)) / (2.0 * 1.1 * 1.1)).exp()
        + 0.35 * (-((x - 0.40).powi(2) + (y - 0.30).powi(2)) / (2.0 * 0.9 * 0.9)).exp()
}

fn main() {
    let (xr, yr) = ((-1.1, 1.1), (-0.85, 0.85));
    let mut cloud_pts = Vec::new();
    for j in 0..120 {
        for i in 0..120 {
            let x = xr.0 + (xr.1 - xr.0) * i as f64 / 119.0;
            let y = yr.0 + (yr.1 - yr.0) * j as f64 / 119.0;
            cloud_pts.push(Vector3::new(x, y, two_bumps(x, y)));
        }
    }
    let cloud = PointCloud::new(cloud_pts).unwrap();
    let atlas = SurfaceAtlas::build_uniform(&cloud, 8, 8).unwrap();
    println!("plane normal {:?}", atlas.plane().normal);
    println!("plane axis1  {:?}", atlas.plane().axis1);
    println!("fitted {}", atlas.n_fitted());
    for row in 0..9 {
        for col in 0..9 {
            if let CellState::Fitted(f) = atlas.cell_state(col, row) {
                let cq = atlas.plane().to_plane(&f.sphere.center());
                if f.sphere.radius() < 3.0 {
                    println!(
                        "cell ({col},{row}): n={:4} r={:9.3} c_inplane=({:7.3},{:7.3})",
                        f.count,
                        f.sphere.radius(),
                        cq.0,
                        cq.1
                    );
                }
            } else {
                println!("cell ({col},{row}): {:?}", atlas.cell_state(col, row));
            }
        }
    }
    let mut fails = 0;
    for j in 0..200 {
        for i in 0..200 {
            let x = xr.0 + (xr.1 - xr.0) * i as f64 / 199.0;
            let y = yr.0 + (yr.1 - yr.0) * j as f64 / 199.0;
            let p = Vector3::new(x, y, two_bumps(x, y));
            let q = atlas.plane().to_plane(&p);
            if let Err(e) = atlas.lift_to_surface(q) {
                if fails < 8 {
                    println!(
                        "lift {e:?} at ({x:.3},{y:.3}) q=({:.3},{:.3}) cell {:?}",
                        q.0,
                        q.1,
                        atlas.grid().cell_of(q)
                    );
                }
                fails += 1;
            }
        }
    }
    println!("lift failures: {fails}/40000");
}
