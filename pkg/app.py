import os
import json
import argparse
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from algebra import AlgebraElement, FdAlgebra, GeneratingSet, random_generating_set
from artifacts import to_jsonable, write_csv_atomic, write_json_atomic
from duality import (
	GridFn,
	RealFunctionOnSpace,
	biconjugate,
	delta_curve,
	exact_modulus,
	hull_slope_grid,
	lip_regularize,
	lipschitz_distance,
	random_concave_modulus,
	reconstruct_modulus,
	sandwich_check,
)
from gallery import a0_setup, run_scenario
from linalg import NonFiniteError, split_seed
from modulus import (
	EQUALITY_TOLERANCE,
	NoModulusError,
	chain_inequality_check,
	concave_majorant,
	empirical_modulus,
	modulus_calculus_report,
	modulus_table,
	morphism_modulus_check,
	uniform_equivalence_check,
)
from reps import Representation, pushforward_set, rep_distance, sample_rep_pairs
from run_config import ConfigError, RunConfig, load_run_config
from run_logs import get_run_log_manager, log_run_event
from schema_io import (
	SchemaError,
	algebra_from_json,
	algebra_to_json,
	concave_from_json,
	concave_to_json,
	element_from_json,
	element_to_json,
	generating_set_from_json,
	homomorphism_from_json,
	homomorphism_to_json,
	load_representation_list,
	measure_from_json,
	representation_to_json,
	space_from_json,
	space_to_json,
)
from transport import (
	Measure,
	SolverFailureError,
	commutative_algebra,
	kantorovich,
	kantorovich_primal_oracle,
	lipschitz_generators,
	point_rep,
	random_measure,
	random_space,
)

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_VIOLATED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

ISOMETRY_TOLERANCE = 1e-10
DEFAULT_SPACE_SIZE = 5

CommandResult = Tuple[bool, Dict[str, Any]]


def _seeds(config: RunConfig, count: int) -> List[int]:
	return split_seed(config.seed, count)


def _param(config: RunConfig, key: str, default: Any = None) -> Any:
	return config.params.get(key, default)


def _int_param(config: RunConfig, key: str, default: int) -> int:
	value = _param(config, key, default)
	if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
		raise ConfigError(f"'{key}' must be an integer, got {value!r}")
	return int(value)


def _complex_param(config: RunConfig, key: str, default: complex) -> complex:
	value = _param(config, key, default)
	if isinstance(value, list) and len(value) == 2:
		return complex(float(value[0]), float(value[1]))
	if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
		return complex(value)
	raise ConfigError(f"'{key}' must be a number or [re, im], got {value!r}")


def _multiplicities(config: RunConfig, algebra: FdAlgebra) -> List[int]:
	if config.multiplicities is None:
		return [1] * algebra.block_count
	if len(config.multiplicities) != algebra.block_count:
		raise ConfigError(f"multiplicities {config.multiplicities} do not match {algebra.block_count} blocks")
	return list(config.multiplicities)


def _space(config: RunConfig, seed: int):
	if "space" in config.params:
		return space_from_json(config.params["space"])
	return random_space(_int_param(config, "space_size", DEFAULT_SPACE_SIZE), seed)


# --- 표현 거리 행렬 ---

def _metric_inputs(config: RunConfig) -> Tuple[List[str], List[Representation], GeneratingSet, Optional[np.ndarray]]:
	"""(라벨, 표현 목록, K, 기대 거리 행렬 또는 None)"""
	preset = _param(config, "preset")
	if preset == "a0_discrete":
		_, _, K, reps = a0_setup(_int_param(config, "N", 3))
		return [f"rho_{n}" for n in range(1, len(reps) + 1)], reps, K, None
	if preset is not None:
		raise ConfigError(f"unknown metric preset '{preset}'")
	if "space" in config.params:
		space = space_from_json(config.params["space"])
		K = lipschitz_generators(space)
		reps = [point_rep(space, label) for label in space.points]
		return list(space.points), reps, K, np.asarray(space.dist)
	for key in ("algebra", "generating_set", "representations"):
		if key not in config.params:
			raise ConfigError(f"metric input needs '{key}' (or 'space', or preset 'a0_discrete')")
	algebra = algebra_from_json(config.params["algebra"])
	K = generating_set_from_json(config.params["generating_set"], algebra).verify(config.max_word_len)
	reps = load_representation_list(config.params["representations"], algebra)
	return [f"pi_{i}" for i in range(len(reps))], reps, K, None


def cmd_metric(config: RunConfig, out_dir: str) -> CommandResult:
	"""표현 목록의 d_K 거리 행렬과 거리 공리 잔차"""
	labels, reps, K, expected = _metric_inputs(config)
	n = len(reps)
	dist = np.zeros((n, n))
	for i in range(n):
		for j in range(n):
			dist[i, j] = rep_distance(reps[i], reps[j], K)

	symmetry = float(np.max(np.abs(dist - dist.T))) if n else 0.0
	diagonal = float(np.max(np.abs(np.diag(dist)))) if n else 0.0
	triangle = 0.0
	if n:
		through = np.min(dist[:, :, None] + dist[None, :, :], axis=1)
		triangle = max(0.0, float(np.max(dist - through)))
	isometry = float(np.max(np.abs(dist - expected))) if expected is not None else None

	passed = symmetry <= config.tolerance and triangle <= config.tolerance and diagonal <= config.tolerance
	if isometry is not None:
		passed = passed and isometry <= ISOMETRY_TOLERANCE
	summary = {
		"representations": n,
		"generating_set_size": len(K),
		"generating_set_verified": K.verified,
		"symmetry_residual": symmetry,
		"diagonal_residual": diagonal,
		"max_triangle_residual": triangle,
		"isometry_residual": isometry,
		"passed": passed,
	}
	write_csv_atomic(os.path.join(out_dir, "distances.csv"), ["rep"] + labels, [[label] + row for label, row in zip(labels, dist.tolist())])
	write_json_atomic(os.path.join(out_dir, "metric.json"), dict(summary, labels=labels, distances=dist, representations=[representation_to_json(pi) for pi in reps]), config.timezone)
	return passed, summary


# --- 연속률 파이프라인 ---

def _modulus_inputs(config: RunConfig) -> Tuple[FdAlgebra, GeneratingSet, GeneratingSet, List[AlgebraElement]]:
	seed_k, seed_kp, seed_el = _seeds(config, 5)[1:4]
	algebra = algebra_from_json(_param(config, "algebra", {"block_dims": [2, 3]}))
	if "generating_set" in config.params:
		K = generating_set_from_json(config.params["generating_set"], algebra).verify(config.max_word_len)
	else:
		K = random_generating_set(algebra, _int_param(config, "generating_set_size", 2), np.random.default_rng(seed_k), config.max_word_len)
	if "generating_set_prime" in config.params:
		K_prime = generating_set_from_json(config.params["generating_set_prime"], algebra).verify(config.max_word_len)
	else:
		K_prime = random_generating_set(algebra, len(K), np.random.default_rng(seed_kp), config.max_word_len)
	if "elements" in config.params:
		docs = config.params["elements"]
		if not isinstance(docs, list) or not docs:
			raise SchemaError("'elements' must be a nonempty list")
		elements = [element_from_json(d, algebra) for d in docs]
	else:
		rng = np.random.default_rng(seed_el)
		elements = [algebra.random_element(rng) for _ in range(2)]
	return algebra, K, K_prime, elements


def _morphism_check(config: RunConfig, algebra: FdAlgebra, K: GeneratingSet, elements: List[AlgebraElement], seed: int) -> Optional[Dict[str, Any]]:
	"""설정에 homomorphism 이 있으면 target 표현 쌍에서 pullback 연속률 검사"""
	if "homomorphism" not in config.params:
		return None
	alpha = homomorphism_from_json(config.params["homomorphism"])
	if alpha.source != algebra:
		raise ConfigError(f"homomorphism source {alpha.source} does not match algebra {algebra}")
	image = pushforward_set(alpha, K, config.max_word_len)
	target_pairs = sample_rep_pairs(alpha.target, [1] * alpha.target.block_count, config.sample_count, seed, config.perturbation_scale)
	report = morphism_modulus_check(target_pairs, alpha, K, image, elements)
	report["homomorphism"] = homomorphism_to_json(alpha)
	return report


def cmd_modulus(config: RunConfig, out_dir: str) -> CommandResult:
	"""원소별 계단/오목 연속률 CSV + 계산 규칙, 체인, 균등 동치 보고"""
	seeds = _seeds(config, 5)
	algebra, K, K_prime, elements = _modulus_inputs(config)
	if not K.verified:
		logger.warning("⚠️ K does not generate the algebra at the configured word length; d_K is a pseudometric")
	pairs = sample_rep_pairs(algebra, _multiplicities(config, algebra), config.sample_count, seeds[0], config.perturbation_scale)

	curves = []
	for idx, x in enumerate(elements):
		f = empirical_modulus(pairs, K, [x])
		hull = concave_majorant(f)
		write_csv_atomic(os.path.join(out_dir, f"modulus_{idx}.csv"), ["t", "step_value", "hull_value"], modulus_table(f, hull))
		curves.append({"element": idx, "hull": concave_to_json(hull), "max_t": f.max_t})

	a = elements[0]
	b = elements[1] if len(elements) > 1 else elements[0]
	calculus = modulus_calculus_report(pairs, K, a, b, _complex_param(config, "lambda", 2.0))
	chain = chain_inequality_check(pairs, K, K_prime, a)
	uniform = uniform_equivalence_check(pairs, K, K_prime)
	morphism = _morphism_check(config, algebra, K, elements, seeds[4])

	calculus_residuals = calculus["residuals"]
	passed = (
		all(calculus_residuals[k] <= EQUALITY_TOLERANCE for k in ("adjoint", "shift", "unit", "scale"))
		and all(calculus_residuals[k] <= config.tolerance for k in ("subadditive", "leibniz"))
		and chain["residual"] <= config.tolerance
		and chain["per_sample_residual"] <= config.tolerance
		and uniform["residual"] <= config.tolerance
		and (morphism is None or morphism["passed"])
	)
	summary = {
		"provenance": calculus["provenance"],
		"sample_count": len(pairs),
		"generating_set_verified": K.verified,
		"calculus_residuals": calculus_residuals,
		"calculus_per_sample_residuals": calculus["per_sample_residuals"],
		"chain_residual": chain["residual"],
		"chain_per_sample_residual": chain["per_sample_residual"],
		"uniform_equivalence_residual": uniform["residual"],
		"morphism": morphism,
		"passed": passed,
	}
	report = dict(
		summary,
		algebra=algebra_to_json(algebra),
		generating_set=[element_to_json(x) for x in K.elements],
		elements=[element_to_json(x) for x in elements],
		curves=curves,
		uniform_witness=concave_to_json(uniform["witness"]),
	)
	write_json_atomic(os.path.join(out_dir, "modulus_report.json"), report, config.timezone)
	return passed, summary


# --- 쌍대성 파이프라인 ---

def _function_values(config: RunConfig, key: str, size: int, rng: np.random.Generator) -> Optional[np.ndarray]:
	if key in config.params:
		values = np.asarray(config.params[key], dtype=float).reshape(-1)
		if values.shape[0] != size:
			raise ConfigError(f"'{key}' has {values.shape[0]} values for {size} points")
		return values
	return rng.standard_normal(size)


def cmd_duality(config: RunConfig, out_dir: str) -> CommandResult:
	"""Fenchel 왕복, 이중 켤레 멱등성, Lipschitz 정칙화, 샌드위치 검사"""
	seed_omega, seed_space, seed_f, seed_pairs = _seeds(config, 4)
	rng = np.random.default_rng(seed_omega)
	omega = concave_from_json(config.params["modulus"]) if "modulus" in config.params else random_concave_modulus(rng)

	deltas = delta_curve(omega)
	recon = reconstruct_modulus(deltas, omega.ts)
	roundtrip = float(np.max(np.abs(recon.values - np.asarray(omega(recon.grid)))))

	h = GridFn(np.linspace(0.0, 1.0, 16), rng.standard_normal(16))
	h_star_star = biconjugate(h)
	idempotence = float(np.max(np.abs(biconjugate(h_star_star).values - h_star_star.values)))

	space = _space(config, seed_space)
	f_rng = np.random.default_rng(seed_f)
	u = RealFunctionOnSpace(space, _function_values(config, "function", space.size, f_rng))
	v = RealFunctionOnSpace(space, _function_values(config, "function_imag", space.size, f_rng))
	omega_u = exact_modulus(u)
	regularization = []
	for s in hull_slope_grid(omega_u):
		if s <= 0.0:
			continue
		_, report = lip_regularize(u, float(s), omega_u)
		report["lipschitz_distance"] = lipschitz_distance(u, float(s))
		regularization.append(report)
	regularization_ok = all(r["lipschitz_ok"] and r["deviation_ok"] for r in regularization)

	algebra = commutative_algebra(space)
	K = lipschitz_generators(space)
	pairs = sample_rep_pairs(algebra, _multiplicities(config, algebra), config.sample_count, seed_pairs, config.perturbation_scale)
	sandwich = sandwich_check(u, v, pairs, K)

	passed = roundtrip <= config.tolerance and idempotence <= EQUALITY_TOLERANCE and regularization_ok and sandwich["passed"]
	summary = {
		"roundtrip_residual": roundtrip,
		"biconjugate_idempotence_residual": idempotence,
		"regularization_checked": len(regularization),
		"regularization_ok": regularization_ok,
		"sandwich": sandwich,
		"passed": passed,
	}
	write_csv_atomic(os.path.join(out_dir, "delta.csv"), ["s", "delta"], deltas.to_rows())
	write_csv_atomic(
		os.path.join(out_dir, "reconstruction.csv"),
		["t", "omega", "reconstructed"],
		[[t, omega(t), w] for t, w in recon.to_rows()],
	)
	write_csv_atomic(
		os.path.join(out_dir, "regularization.csv"),
		["s", "delta", "lipschitz", "sup_deviation", "lipschitz_distance"],
		[[r["s"], r["delta"], r["lipschitz"], r["sup_deviation"], r["lipschitz_distance"]] for r in regularization],
	)
	write_json_atomic(
		os.path.join(out_dir, "duality.json"),
		dict(summary, modulus=concave_to_json(omega), space=space_to_json(space), regularization=regularization),
		config.timezone,
	)
	return passed, summary


# --- Kantorovich 파이프라인 ---

def _measures(config: RunConfig, space, seed: int) -> List[Measure]:
	if "measures" in config.params:
		docs = config.params["measures"]
		if not isinstance(docs, list) or not docs:
			raise SchemaError("'measures' must be a nonempty list")
		return [measure_from_json(d, space) for d in docs]
	rng = np.random.default_rng(seed)
	measures = [Measure.dirac(space, label) for label in space.points]
	measures += [random_measure(space, rng) for _ in range(_int_param(config, "random_measures", 3))]
	return measures


def _dirac_index(mu: Measure) -> Optional[int]:
	support = np.flatnonzero(mu.weights)
	if support.size == 1 and mu.weights[support[0]] == 1.0:
		return int(support[0])
	return None


def cmd_transport(config: RunConfig, out_dir: str) -> CommandResult:
	"""측도 쌍별 Kantorovich 거리 (쌍대 LP) + 원 문제 oracle 대조"""
	seed_space, seed_measures = _seeds(config, 2)
	space = _space(config, seed_space)
	measures = _measures(config, space, seed_measures)
	n = len(measures)
	dual = np.zeros((n, n))
	gaps = np.zeros((n, n))
	certificates = []
	extension = 0.0
	for i in range(n):
		for j in range(i + 1, n):
			result = kantorovich(measures[i], measures[j])
			primal = kantorovich_primal_oracle(measures[i], measures[j])
			dual[i, j] = dual[j, i] = result["value"]
			gaps[i, j] = gaps[j, i] = abs(result["value"] - primal)
			certificates.append({"i": i, "j": j, "value": result["value"], "primal": primal, "potential": result["potential"]})
			x, y = _dirac_index(measures[i]), _dirac_index(measures[j])
			if x is not None and y is not None:
				extension = max(extension, abs(result["value"] - float(space.dist[x, y])))

	max_gap = float(np.max(gaps)) if n else 0.0
	passed = max_gap <= config.tolerance and extension <= ISOMETRY_TOLERANCE
	summary = {
		"points": space.size,
		"measures": n,
		"max_duality_gap": max_gap,
		"dirac_extension_residual": extension,
		"passed": passed,
	}
	labels = [f"mu_{i}" for i in range(n)]
	write_csv_atomic(os.path.join(out_dir, "kantorovich.csv"), ["measure"] + labels, [[label] + row for label, row in zip(labels, dual.tolist())])
	write_json_atomic(
		os.path.join(out_dir, "transport.json"),
		dict(summary, space=space_to_json(space), weights=[m.weights for m in measures], certificates=certificates),
		config.timezone,
	)
	return passed, summary


# --- 갤러리 / 실행 로그 ---

def cmd_gallery(config: RunConfig, out_dir: str) -> CommandResult:
	"""등록된 반례 시나리오 실행 (scenario 외 설정 키는 시나리오 매개변수)"""
	if not config.scenario:
		raise ConfigError("gallery needs a scenario (--scenario or config 'scenario')")
	result = run_scenario(config.scenario, config.params, config.seed, out_dir)
	return result.passed, result.to_dict()


def cmd_logs(config: RunConfig, out_dir: str) -> CommandResult:
	"""저장된 실행 로그 요약 출력"""
	manager = get_run_log_manager(config.log_file, config.timezone)
	summary = manager.get_summary()
	print(json.dumps({"summary": summary, "recent": manager.get_logs(limit=_int_param(config, "limit", 10))}, ensure_ascii=False, indent=2))
	return True, {"total_logs": summary["total_logs"]}


COMMANDS: Dict[str, Callable[[RunConfig, str], CommandResult]] = {
	"metric": cmd_metric,
	"modulus": cmd_modulus,
	"duality": cmd_duality,
	"transport": cmd_transport,
	"gallery": cmd_gallery,
	"logs": cmd_logs,
}


def build_parser() -> argparse.ArgumentParser:
	common = argparse.ArgumentParser(add_help=False)
	common.add_argument("--config", help="JSON config file")
	common.add_argument("--seed", type=int, help="64-bit seed (required from flag, config file or LAB_SEED)")
	common.add_argument("--out", help="output directory")
	common.add_argument("--tolerance", type=float, help="inequality tolerance")
	common.add_argument("--samples", type=int, help="number of representation pairs")
	common.add_argument("--scenario", help="gallery scenario name")
	common.add_argument("--verbose", action="store_true", help="debug logging")

	parser = argparse.ArgumentParser(prog="repmetric-lab", description="Representation metric laboratory")
	sub = parser.add_subparsers(dest="command", required=True)
	for name, func in COMMANDS.items():
		sub.add_parser(name, parents=[common], help=(func.__doc__ or "").strip())
	return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
	load_dotenv()
	parser = build_parser()
	try:
		args = parser.parse_args(argv)
	except SystemExit as e:
		return EXIT_CONFIG if e.code else EXIT_PASS

	logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

	overrides = {
		"seed": args.seed,
		"output_dir": args.out,
		"tolerance": args.tolerance,
		"sample_count": args.samples,
		"scenario": args.scenario,
	}
	try:
		config = load_run_config(args.command, args.config, overrides, require_seed=args.command != "logs")
	except ConfigError as e:
		logger.error(f"❌ config error: {e}")
		return EXIT_CONFIG

	out_dir = os.path.join(config.output_dir, args.command)
	details = {"seed": config.seed, "config_path": config.config_path}
	if args.command != "logs":
		log_run_event(config.log_file, args.command, "started", f"seed={config.seed}", details, config.timezone)

	try:
		passed, summary = COMMANDS[args.command](config, out_dir)
	except (NonFiniteError, SolverFailureError, np.linalg.LinAlgError) as e:
		logger.error(f"💥 numerical failure in {args.command}: {e}")
		log_run_event(config.log_file, args.command, "failed", str(e), details, config.timezone)
		return EXIT_NUMERICAL
	except NoModulusError as e:
		logger.error(f"❌ {args.command}: {e}")
		log_run_event(config.log_file, args.command, "violated", str(e), details, config.timezone)
		return EXIT_VIOLATED
	except (ValueError, KeyError, TypeError) as e:
		# 입력 스키마/도메인 오류
		logger.error(f"❌ invalid input for {args.command}: {e}")
		log_run_event(config.log_file, args.command, "failed", str(e), details, config.timezone)
		return EXIT_CONFIG
	except Exception as e:
		logger.exception(f"💥 unexpected failure in {args.command}: {e}")
		log_run_event(config.log_file, args.command, "failed", str(e), details, config.timezone)
		return EXIT_NUMERICAL

	if args.command == "logs":
		return EXIT_PASS
	status = "passed" if passed else "violated"
	log_run_event(config.log_file, args.command, status, f"{args.command} {status}", dict(details, summary=to_jsonable(summary)), config.timezone)
	return EXIT_PASS if passed else EXIT_VIOLATED


if __name__ == "__main__":
	raise SystemExit(main())
