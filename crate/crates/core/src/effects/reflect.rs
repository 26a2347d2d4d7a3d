use std::f64::consts::FRAC_PI_2;

use crate::brdf::Material;
use crate::effects::ShadowWall;
use crate::geom::{sample_hemisphere_uniform, Direction, Rgb, VIEW};
use crate::rng::RandomStream;

/// Candidate reflection directions drawn per pixel.
pub const REFLECTION_CANDIDATES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflector {
    /// Direction from the pixel towards the reflecting point.
    pub direction: Direction,
    pub normal: Direction,
    pub albedo: Rgb,
}

/// Secondary single-bounce sources. Every direction lies inside the shadow
/// region of the wall it was sampled against.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReflectionSet {
    entries: Vec<Reflector>,
}

impl ReflectionSet {
    pub fn empty() -> Self {
        ReflectionSet::default()
    }

    /// Panics if any direction is unshaded by `wall`.
    pub fn new(entries: Vec<Reflector>, wall: &ShadowWall) -> Self {
        assert!(
            entries.iter().all(|e| wall.is_shaded(e.direction)),
            "reflection directions must lie in the wall's shadow"
        );
        ReflectionSet { entries }
    }

    pub fn entries(&self) -> &[Reflector] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Draws candidate directions uniformly on the upper hemisphere and keeps
/// the shaded ones, each with a random normal and albedo. Material is shared
/// with the main pixel, so it is not part of the set.
pub fn sample_reflections(rng: &mut RandomStream, wall: &ShadowWall) -> ReflectionSet {
    let mut entries = Vec::new();
    for _ in 0..REFLECTION_CANDIDATES {
        let direction = sample_hemisphere_uniform(rng, FRAC_PI_2);
        if wall.is_shaded(direction) {
            let normal = sample_hemisphere_uniform(rng, FRAC_PI_2);
            let albedo = Rgb::new(rng.unit(), rng.unit(), rng.unit());
            entries.push(Reflector {
                direction,
                normal,
                albedo,
            });
        }
    }
    ReflectionSet { entries }
}

/// Single-bounce reflection `Σ B(N_R, l, L_R) ⊙ B(n, L_R, V₀)` over the
/// entries whose direction differs from `l`.
pub fn self_reflection(
    n: Direction,
    l: Direction,
    refl: &ReflectionSet,
    albedo: Rgb,
    material: &Material<'_>,
) -> Rgb {
    refl.entries
        .iter()
        .filter(|e| e.direction != l)
        .fold(Rgb::ZERO, |acc, e| {
            let incoming = material.eval(e.normal, l, e.direction, e.albedo);
            let outgoing = material.eval(n, e.direction, VIEW, albedo);
            acc + incoming * outgoing
        })
}

/// Reflectance averaged over `t` sub-pixels: direct term gated by the wall
/// plus each sub-pixel's self-reflection.
pub fn total_reflectance(
    normals: &[Direction],
    albedos: &[Rgb],
    l: Direction,
    wall: &ShadowWall,
    refl: &ReflectionSet,
    material: &Material<'_>,
) -> Rgb {
    assert!(
        !normals.is_empty() && normals.len() == albedos.len(),
        "need matching, non-empty sub-pixel lists"
    );
    let lit = !wall.is_shaded(l);
    let mut sum = Rgb::ZERO;
    for (&n, &rho) in normals.iter().zip(albedos) {
        if lit {
            sum += material.eval(n, l, VIEW, rho);
        }
        sum += self_reflection(n, l, refl, rho, material);
    }
    sum / normals.len() as f64
}

/// Precomputed form of [`total_reflectance`] for evaluating many lights
/// against one pixel. The outgoing half of every bounce does not depend on
/// the light, so it is evaluated once.
#[derive(Debug, Clone)]
pub struct PixelShader<'a> {
    material: Material<'a>,
    subpixels: Vec<(Direction, Rgb)>,
    // per reflector, per sub-pixel: B(n_k, L_R, V0, rho_k)
    outgoing: Vec<Vec<Rgb>>,
    wall: ShadowWall,
    reflectors: Vec<Reflector>,
}

impl<'a> PixelShader<'a> {
    pub fn new(
        normals: &[Direction],
        albedos: &[Rgb],
        wall: &ShadowWall,
        refl: &ReflectionSet,
        material: Material<'a>,
    ) -> Self {
        assert!(!normals.is_empty() && normals.len() == albedos.len());
        let subpixels: Vec<_> = normals.iter().copied().zip(albedos.iter().copied()).collect();
        let outgoing = refl
            .entries
            .iter()
            .map(|e| {
                subpixels
                    .iter()
                    .map(|&(n, rho)| material.eval(n, e.direction, VIEW, rho))
                    .collect()
            })
            .collect();
        PixelShader {
            material,
            subpixels,
            outgoing,
            wall: wall.clone(),
            reflectors: refl.entries.clone(),
        }
    }

    /// Same value as [`total_reflectance`] for this pixel and light `l`, up
    /// to summation order.
    pub fn reflectance(&self, l: Direction) -> Rgb {
        let mut sum = Rgb::ZERO;
        if !self.wall.is_shaded(l) {
            for &(n, rho) in &self.subpixels {
                sum += self.material.eval(n, l, VIEW, rho);
            }
        }
        for (e, outgoing) in self.reflectors.iter().zip(&self.outgoing) {
            if e.direction == l {
                continue;
            }
            let incoming = self.material.eval(e.normal, l, e.direction, e.albedo);
            if incoming == Rgb::ZERO {
                continue;
            }
            for out in outgoing {
                sum += incoming * *out;
            }
        }
        sum / self.subpixels.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brdf::DisneyParams;

    fn shiny() -> Material<'static> {
        Material::Disney(DisneyParams {
            metallic: 0.3,
            specular: 0.8,
            roughness: 0.2,
            ..Default::default()
        })
    }

    fn tall_wall() -> ShadowWall {
        ShadowWall::new(vec![1e6; 20])
    }

    fn reflector(x: f64, y: f64, z: f64, n: Direction) -> Reflector {
        Reflector {
            direction: Direction::new(x, y, z),
            normal: n,
            albedo: Rgb::new(0.9, 0.4, 0.2),
        }
    }

    #[test]
    fn empty_wall_gives_no_reflectors() {
        let mut rng = RandomStream::new(5, 0, 0);
        for _ in 0..100 {
            assert!(sample_reflections(&mut rng, &ShadowWall::empty(20)).is_empty());
        }
    }

    #[test]
    fn tall_wall_keeps_every_candidate() {
        let mut rng = RandomStream::new(5, 1, 0);
        let total: usize = (0..200)
            .map(|_| sample_reflections(&mut rng, &tall_wall()).len())
            .sum();
        assert_eq!(total, 200 * REFLECTION_CANDIDATES);
    }

    #[test]
    fn empty_set_reflects_nothing() {
        let l = Direction::new(0.3, 0.1, 0.9);
        let out = self_reflection(VIEW, l, &ReflectionSet::empty(), Rgb::ONE, &shiny());
        assert_eq!(out, Rgb::ZERO);
    }

    #[test]
    fn sum_is_additive_over_entries() {
        let wall = tall_wall();
        let a = reflector(0.8, 0.1, 0.2, Direction::new(0.3, 0.1, 0.9));
        let b = reflector(-0.3, 0.7, 0.3, Direction::new(-0.1, 0.3, 0.9));
        let l = Direction::new(0.2, 0.3, 0.9);
        let n = Direction::new(0.1, 0.2, 0.95);
        let m = shiny();
        let both = self_reflection(n, l, &ReflectionSet::new(vec![a, b], &wall), Rgb::ONE, &m);
        let sa = self_reflection(n, l, &ReflectionSet::new(vec![a], &wall), Rgb::ONE, &m);
        let sb = self_reflection(n, l, &ReflectionSet::new(vec![b], &wall), Rgb::ONE, &m);
        let diff = both - (sa + sb);
        assert!(diff.to_array().iter().all(|d| d.abs() < 1e-15));
        assert!(both.max_channel() > 0.0);
    }

    #[test]
    fn reflector_facing_away_from_light_is_dark() {
        let wall = tall_wall();
        // N_R points away from l, so the first factor clamps to zero
        let l = Direction::new(0.5, 0.0, 0.8);
        let e = reflector(0.3, 0.5, 0.4, Direction::new(-0.9, 0.0, 0.1));
        assert!(e.normal.dot(l) <= 0.0);
        let out = self_reflection(VIEW, l, &ReflectionSet::new(vec![e], &wall), Rgb::ONE, &shiny());
        assert_eq!(out, Rgb::ZERO);
    }

    #[test]
    fn shaded_light_keeps_only_reflection() {
        let wall = tall_wall();
        let e = reflector(0.8, 0.1, 0.2, Direction::new(-0.5, 0.0, 0.8));
        let set = ReflectionSet::new(vec![e], &wall);
        let l = Direction::new(0.4, 0.3, 0.5);
        assert!(wall.is_shaded(l));
        let n = Direction::new(0.1, 0.0, 1.0);
        let m = shiny();
        let total = total_reflectance(&[n], &[Rgb::ONE], l, &wall, &set, &m);
        assert_eq!(total, self_reflection(n, l, &set, Rgb::ONE, &m));
    }

    #[test]
    fn duplicated_subpixels_match_single() {
        let wall = ShadowWall::empty(20);
        let n = Direction::new(0.2, -0.1, 0.9);
        let l = Direction::new(-0.3, 0.3, 0.8);
        let rho = Rgb::new(0.3, 0.6, 0.9);
        let m = shiny();
        let one = total_reflectance(&[n], &[rho], l, &wall, &ReflectionSet::empty(), &m);
        let two = total_reflectance(&[n, n], &[rho, rho], l, &wall, &ReflectionSet::empty(), &m);
        assert_eq!(one, two);
        assert_eq!(one, m.eval(n, l, VIEW, rho));
    }

    #[test]
    fn shader_matches_reference() {
        let mut rng = RandomStream::new(11, 0, 0);
        let m = shiny();
        for _ in 0..50 {
            let wall = crate::effects::sample_shadow_wall(&mut rng, &Default::default());
            let refl = sample_reflections(&mut rng, &wall);
            let normals: Vec<_> = (0..3).map(|_| sample_hemisphere_uniform(&mut rng, FRAC_PI_2)).collect();
            let albedos: Vec<_> = (0..3).map(|_| Rgb::new(rng.unit(), rng.unit(), rng.unit())).collect();
            let shader = PixelShader::new(&normals, &albedos, &wall, &refl, m);
            for _ in 0..20 {
                let l = sample_hemisphere_uniform(&mut rng, 70f64.to_radians());
                let a = shader.reflectance(l);
                let b = total_reflectance(&normals, &albedos, l, &wall, &refl, &m);
                let d = a - b;
                assert!(d.to_array().iter().all(|v| v.abs() <= 1e-12 * (1.0 + b.max_channel())));
            }
        }
    }
}
