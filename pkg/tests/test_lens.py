import numpy as np
import pytest
from scipy.stats import special_ortho_group

from mapper_forge import CoordinateLens, EccentricityLens, LensSpec, apply_lens, generate_circle
from mapper_forge.exceptions import ConfigurationError


def test_coordinate_projection():
    values = apply_lens([(0, 0), (1, 2)], LensSpec("coordinate", axis=1))
    np.testing.assert_array_equal(values.ravel(), [0, 2])


def test_eccentricity_includes_self_term():
    values = apply_lens([(0, 0), (3, 4)], LensSpec("eccentricity"))
    np.testing.assert_array_equal(values.ravel(), [2.5, 2.5])


def test_coordinate_on_clean_circle_in_range():
    data = generate_circle(400, 1, 0, seed=0)
    values = apply_lens(data, LensSpec("coordinate", axis=0))
    assert values.shape == (400, 1)
    assert np.all((values >= -1) & (values <= 1))


def test_axis_out_of_range():
    with pytest.raises(ConfigurationError):
        apply_lens([(0, 0)], LensSpec("coordinate", axis=2))


def test_unknown_kind():
    with pytest.raises(ConfigurationError):
        LensSpec("pca")


@pytest.mark.parametrize("spec", [LensSpec("coordinate", axis=1), LensSpec("eccentricity")])
def test_permutation_equivariance(rng, spec):
    X = rng.normal(size=(60, 3))
    perm = rng.permutation(60)
    np.testing.assert_allclose(apply_lens(X[perm], spec), apply_lens(X, spec)[perm], atol=1e-12)


def test_eccentricity_isometry_invariant(rng):
    X = rng.normal(size=(80, 3))
    R = special_ortho_group.rvs(3, random_state=7)
    moved = X @ R.T + np.array([5.0, -2.0, 0.5])
    spec = LensSpec("eccentricity")
    np.testing.assert_allclose(apply_lens(moved, spec), apply_lens(X, spec), atol=1e-9)


def test_eccentricity_transform_new_points():
    lens = EccentricityLens().fit([(0, 0), (2, 0)])
    np.testing.assert_allclose(lens.transform([(1, 0)]).ravel(), [1.0])


def test_spec_round_trip():
    for spec in (LensSpec("coordinate", axis=3), LensSpec("eccentricity", metric="cosine")):
        assert LensSpec.from_dict(spec.to_dict()) == spec


def test_transformer_checks_width():
    lens = CoordinateLens(axis=0).fit(np.zeros((3, 2)))
    with pytest.raises(ConfigurationError):
        lens.transform(np.zeros((3, 4)))
