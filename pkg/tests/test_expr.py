import numpy as np
import pytest

from crindex.errors import (
    CoordinateRangeError,
    ExprDomainError,
    ExpressionError,
    ExprSyntaxError,
    RealnessError,
    UnknownIdentifierError,
)
from crindex.expr import (
    Binary,
    Const,
    Coord,
    Power,
    Unary,
    eval_complex,
    eval_expr,
    format_expr,
    parse_defining_function,
    rotate_expr,
)
from tests.helpers import TUBE_DF, random_unitary

ROUND_TRIP_CASES = [
    "abs2(z1)^2 + abs2(z2) - 1",
    "2*re(z2) + abs2(z1)^3 + abs2(z1)*0.0",
    "exp(-abs2(z1))*cos(im(z2)) - 0.25",
    "log(1 + abs2(z1 - 2*z2)) / (3 + sin(re(z1)))",
    "sqrt(1 + abs2(z1)) - re(i*z1*conj(z2))",
    TUBE_DF,
]


class TestParser:
    def test_precedence(self):
        """Test that ^ binds tighter than * and unary minus."""
        ast = parse_defining_function("-re(z1) + 2*im(z2)^2", 2)
        assert ast == Binary(
            "+",
            Unary("neg", Unary("re", Coord(1))),
            Binary("*", Const(2 + 0j), Power(Unary("im", Coord(2)), 2)),
        )

    def test_unary_minus_below_power(self):
        """Test that -x^2 parses as -(x^2)."""
        ast = parse_defining_function("-abs2(z1)^2", 2)
        assert ast == Unary("neg", Power(Unary("abs2", Coord(1)), 2))

    def test_double_star_power(self):
        """Test that ** is accepted as a power operator."""
        assert parse_defining_function("abs2(z1)**2", 2) == parse_defining_function(
            "abs2(z1)^2", 2
        )

    def test_left_associativity(self):
        """Test that - and / associate to the left."""
        assert eval_expr(parse_defining_function("re(z1) - re(z2) - 1", 2), (3, 1)) == 1.0
        assert eval_expr(parse_defining_function("re(z1)/2/2", 2), (8, 0)) == 2.0

    def test_negative_integer_exponent(self):
        """Test exponents with a sign."""
        ast = parse_defining_function("(1 + abs2(z1))^-2", 2)
        assert eval_expr(ast, (1, 0)) == pytest.approx(0.25)

    def test_imaginary_unit(self):
        """Test that `i` is the imaginary unit."""
        ast = parse_defining_function("re(i*z1)", 2)
        assert eval_expr(ast, (1j, 0)) == pytest.approx(-1.0)

    def test_syntax_error_position(self):
        """Test that syntax errors carry the offending position."""
        with pytest.raises(ExprSyntaxError, match="position 8") as info:
            parse_defining_function("re(z1) +", 2)
        assert info.value.position == 8

    def test_unexpected_character(self):
        """Test that stray characters are rejected with their position."""
        with pytest.raises(ExprSyntaxError, match="position 7"):
            parse_defining_function("re(z1) $ 1", 2)

    def test_non_integer_exponent(self):
        """Test that powers need integer literals."""
        with pytest.raises(ExprSyntaxError, match="integer"):
            parse_defining_function("abs2(z1)^1.5", 2)

    def test_function_needs_parentheses(self):
        """Test that function names must be called."""
        with pytest.raises(ExprSyntaxError):
            parse_defining_function("exp abs2(z1)", 2)

    def test_empty_expression(self):
        """Test that blank input is a syntax error."""
        with pytest.raises(ExprSyntaxError, match="empty"):
            parse_defining_function("   ", 2)

    def test_unknown_identifier(self):
        """Test that unknown names are rejected."""
        with pytest.raises(UnknownIdentifierError, match="foo"):
            parse_defining_function("foo(z1)", 2)

    def test_coordinate_out_of_range(self):
        """Test that z_j must satisfy 1 <= j <= n."""
        with pytest.raises(CoordinateRangeError, match="z3"):
            parse_defining_function("abs2(z3)", 2)
        with pytest.raises(CoordinateRangeError):
            parse_defining_function("abs2(z0)", 2)

    def test_complex_valued_expression(self):
        """Test that holomorphic expressions fail the realness check."""
        with pytest.raises(RealnessError):
            parse_defining_function("z1 + abs2(z2)", 2)

    def test_never_defined_expression(self):
        """Test that an expression undefined at every sample point is rejected."""
        with pytest.raises(RealnessError, match="could not be evaluated"):
            parse_defining_function("log(-1 - abs2(z1))", 2)

    def test_errors_are_value_errors(self):
        """Test that expression errors can be caught as ValueError."""
        assert issubclass(ExpressionError, ValueError)
        with pytest.raises(ValueError):
            parse_defining_function("abs2(z1", 2)


class TestEvaluate:
    def test_polynomial(self):
        """Test evaluation of a real polynomial."""
        ast = parse_defining_function("abs2(z1)^2 + abs2(z2) - 1", 2)
        assert eval_expr(ast, (1j, 0.5)) == pytest.approx(0.25)

    def test_conj_sum_is_real(self):
        """Test that z + conj(z) evaluates to twice the real part."""
        ast = parse_defining_function("z1 + conj(z1)", 2)
        assert eval_expr(ast, (1 + 2j, 0)) == pytest.approx(2.0)

    def test_log_domain(self):
        """Test that log outside (0, inf) raises ExprDomainError."""
        ast = parse_defining_function("log(abs2(z1))", 2)
        with pytest.raises(ExprDomainError, match="log"):
            eval_expr(ast, (0, 1))

    def test_sqrt_of_zero(self):
        """Test that sqrt accepts zero."""
        ast = parse_defining_function("sqrt(abs2(z1))", 2)
        assert eval_expr(ast, (0, 1)) == 0.0

    def test_division_by_zero(self):
        """Test that dividing by zero raises ExprDomainError."""
        ast = parse_defining_function("1/re(z1)", 2)
        with pytest.raises(ExprDomainError, match="division by zero"):
            eval_expr(ast, (0, 0))

    def test_realness_of_value(self):
        """Test that eval_expr refuses a non-real value."""
        with pytest.raises(RealnessError):
            eval_expr(Coord(1), (1j, 0))
        assert eval_complex(Coord(1), (1j, 0)) == 1j

    def test_deterministic(self):
        """Test that evaluation is pure."""
        ast = parse_defining_function(TUBE_DF, 2)
        point = (0.3 - 0.1j, -0.2 + 0.7j)
        assert eval_expr(ast, point) == eval_expr(ast, point)


class TestFormat:
    @pytest.mark.parametrize("text", ROUND_TRIP_CASES)
    def test_round_trip(self, text):
        """Test that the pretty-printed tree re-parses to the same function."""
        ast = parse_defining_function(text, 2)
        again = parse_defining_function(format_expr(ast), 2)
        rng = np.random.default_rng(11)
        for _ in range(100):
            point = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
            a, b = eval_expr(ast, point), eval_expr(again, point)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    def test_negative_constant(self):
        """Test that negative constants are parenthesized."""
        assert format_expr(Binary("*", Const(-2 + 0j), Coord(1))) == "((-2.0) * z1)"


class TestRotate:
    def test_rotation_composes(self):
        """Test that rotate_expr(rho, U)(w) = rho(U w)."""
        ast = parse_defining_function(TUBE_DF, 2)
        u = random_unitary(2, seed=3)
        rotated = rotate_expr(ast, u)
        rng = np.random.default_rng(5)
        for _ in range(20):
            w = rng.normal(size=2) + 1j * rng.normal(size=2)
            assert eval_expr(rotated, w) == pytest.approx(eval_expr(ast, u @ w), abs=1e-12)

    def test_rotated_tree_reparses(self):
        """Test that a rotated tree prints to a valid real expression."""
        ast = parse_defining_function("abs2(z1)^2 + abs2(z2) - 1", 2)
        rotated = rotate_expr(ast, random_unitary(2, seed=8))
        again = parse_defining_function(format_expr(rotated), 2)
        assert eval_expr(again, (0.1, 0.2j)) == pytest.approx(eval_expr(rotated, (0.1, 0.2j)))
