import numpy as np
import pytest

from app.errors import DimensionMismatchError, NonBijectiveError
from app.metrics import entropy, histogram
from app.models import GridPermutation
from app.permutation import apply_permutation, arnold_point, build_permutation, standard_point
from app.schemas import ArnoldParams, Direction, SineConvention, StandardMapParams
from app.testimages import natural_image


class TestArnold:
    def test_origin_is_fixed(self):
        assert arnold_point(0, 0, ArnoldParams(t=3, q=5), 16) == (0, 0)

    def test_single_step(self):
        assert arnold_point(1, 1, ArnoldParams(t=1, q=1), 4) == (2, 3)

    def test_period_three_on_two_grid(self):
        params = ArnoldParams(t=1, q=1)
        for x in range(2):
            for y in range(2):
                point = (x, y)
                for _ in range(3):
                    point = arnold_point(*point, params, 2)
                assert point == (x, y)

    @pytest.mark.parametrize("t, q", [(1, 1), (3, 5), (7, 11), (255, 1)])
    def test_determinant_is_one(self, t, q):
        assert ArnoldParams(t=t, q=q).determinant == 1


class TestStandardMap:
    def test_origin_is_fixed(self):
        assert standard_point(0, 0, StandardMapParams(k=1000.0), 16) == (0, 0)

    def test_small_k_degenerates_to_shear(self):
        params = StandardMapParams(k=0.4)
        for x in range(8):
            for y in range(8):
                assert standard_point(x, y, params, 8) == ((x + y) % 8, y)

    def test_conventional_is_bijective(self):
        perm = build_permutation(StandardMapParams(k=3.0, iterations=1), 16)
        assert np.array_equal(np.sort(perm.forward), np.arange(256))

    def test_literal_form_collision_is_reported(self):
        params = StandardMapParams(k=3.0, iterations=1, sine_convention=SineConvention.PAPER_LITERAL)
        with pytest.raises(NonBijectiveError) as exc_info:
            build_permutation(params, 16)
        err = exc_info.value
        assert err.n == 16
        assert err.source != err.other
        assert standard_point(*divmod(err.source, 16), params, 16) == standard_point(*divmod(err.other, 16), params, 16)


class TestBuildPermutation:
    @pytest.mark.parametrize("params", [ArnoldParams(), StandardMapParams()], ids=["arnold", "standard"])
    @pytest.mark.parametrize("n", [16, 64, 512])
    def test_default_maps_are_bijective(self, params, n):
        perm = build_permutation(params, n)
        assert np.array_equal(np.sort(perm.forward), np.arange(n * n))
        assert np.array_equal(perm.inverse[perm.forward], np.arange(n * n))

    def test_composes_iterations(self):
        params = ArnoldParams(iterations=3)
        perm = build_permutation(params, 16)
        x, y = 5, 9
        for _ in range(3):
            x, y = arnold_point(x, y, params, 16)
        assert perm.forward[5 * 16 + 9] == x * 16 + y

    def test_tables_are_read_only(self):
        perm = build_permutation(ArnoldParams(), 16)
        with pytest.raises(ValueError):
            perm.forward[0] = 1


class TestApplyPermutation:
    def test_identity(self, small_image):
        assert apply_permutation(small_image, GridPermutation.identity(64)) == small_image

    @pytest.mark.parametrize("params", [ArnoldParams(), StandardMapParams()], ids=["arnold", "standard"])
    def test_round_trip(self, small_image, params):
        perm = build_permutation(params, 64)
        scrambled = apply_permutation(small_image, perm)
        assert scrambled != small_image
        assert apply_permutation(scrambled, perm, Direction.INVERSE) == small_image

    def test_moves_pixel_to_target(self, small_image):
        perm = build_permutation(ArnoldParams(), 64)
        scrambled = apply_permutation(small_image, perm)
        i = 1234
        target = perm.forward[i]
        assert np.array_equal(scrambled.data[:, target // 64, target % 64], small_image.data[:, i // 64, i % 64])

    def test_preserves_histogram_and_entropy(self, small_image):
        scrambled = apply_permutation(small_image, build_permutation(StandardMapParams(), 64))
        assert histogram(scrambled).counts == histogram(small_image).counts
        assert entropy(scrambled) == entropy(small_image)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply_permutation(natural_image(32), build_permutation(ArnoldParams(), 16))
