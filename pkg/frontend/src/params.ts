/** Solver parameter form model with the server's validation rules mirrored
 * client-side, so an invalid form (gamma > 1, negative lambda, ...) never
 * reaches the network.
 */

export interface SolverFormParams {
  lambda: number;
  lambda_mode: "absolute" | "relative-to-zero-filled";
  gamma: number;
  max_iter: number;
  tol: number;
  frame: "identity" | "undecimated-haar";
  levels: number;
}

export const DEFAULT_PARAMS: SolverFormParams = {
  lambda: 1e-3,
  lambda_mode: "relative-to-zero-filled",
  gamma: 1.0,
  max_iter: 200,
  tol: 1e-6,
  frame: "undecimated-haar",
  levels: 3,
};

/** Same rules the service enforces as InvalidParams; empty list = valid. */
export function validateParams(p: SolverFormParams): string[] {
  const problems: string[] = [];
  if (!(p.lambda > 0)) problems.push("lambda must be > 0");
  if (!(p.gamma > 0 && p.gamma <= 1)) problems.push("gamma must be in (0, 1]");
  if (!(Number.isInteger(p.max_iter) && p.max_iter >= 1)) problems.push("iterations must be >= 1");
  if (!(p.tol >= 0)) problems.push("tolerance must be >= 0");
  if (p.frame !== "identity" && p.frame !== "undecimated-haar") problems.push("unknown frame");
  if (!(Number.isInteger(p.levels) && p.levels >= 1)) problems.push("levels must be >= 1");
  if (p.lambda_mode !== "absolute" && p.lambda_mode !== "relative-to-zero-filled") {
    problems.push("unknown lambda mode");
  }
  return problems;
}

export function toRequestParams(p: SolverFormParams): Record<string, unknown> {
  return {
    lambda: p.lambda,
    lambda_mode: p.lambda_mode,
    gamma: p.gamma,
    max_iter: p.max_iter,
    tol: p.tol,
    frame: p.frame,
    levels: p.levels,
  };
}
