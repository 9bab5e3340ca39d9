/** Typed errors mirroring the engine's contractual exit codes. */

export class EngineError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number,
    public readonly stderr: string,
  ) {
    super(message);
    this.name = new.target.name;
  }
}

/** Exit 2: grid/matrix shape mismatch, non-finite values, resource caps. */
export class InputValidationError extends EngineError {}

/** Exit 3: unreadable or malformed tensor file. */
export class TensorFormatError extends EngineError {}

/** Exit 4: invalid configuration. */
export class ConfigError extends EngineError {}

/** Exit 64: bad flags (should not happen through this binding). */
export class UsageError extends EngineError {}

export class EngineNotFoundError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EngineNotFoundError";
  }
}

export function mapExitCode(code: number, stderr: string): EngineError {
  const message = stderr.trim() || `engine exited with code ${code}`;
  switch (code) {
    case 2:
      return new InputValidationError(message, code, stderr);
    case 3:
      return new TensorFormatError(message, code, stderr);
    case 4:
      return new ConfigError(message, code, stderr);
    case 64:
      return new UsageError(message, code, stderr);
    default:
      return new EngineError(message, code, stderr);
  }
}
