/* tslint:disable */
/* eslint-disable */

/**
 * Scores for one synthetic stream.
 */
export class DetectRun {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Indices of flagged records.
     */
    readonly flags: Uint32Array;
    readonly likelihoods: Float64Array;
    /**
     * Indices where labeled anomalies begin.
     */
    readonly onsets: Uint32Array;
    readonly probation: number;
    readonly scores: Float64Array;
    readonly values: Float64Array;
}

/**
 * Two channels that each dip to tail probability `depth` for `width`
 * steps, the second starting `offset` steps after the first. Returns
 * `log10(1 - L)` of the combined likelihood per step.
 */
export function combine_dips(offset: number, depth: number, width: number, sigma: number): Float64Array;

/**
 * Generates a synthetic stream and runs the detector over it.
 */
export function detect_synthetic(generator: string, seed: bigint, len: number, epsilon: number): DetectRun;

/**
 * Normalized smoothing weights for lags `0..=ceil(4 sigma)`.
 */
export function kernel_weights(sigma: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_detectrun_free: (a: number, b: number) => void;
    readonly combine_dips: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly detect_synthetic: (a: number, b: number, c: bigint, d: number, e: number) => [number, number, number];
    readonly detectrun_flags: (a: number) => [number, number];
    readonly detectrun_likelihoods: (a: number) => [number, number];
    readonly detectrun_onsets: (a: number) => [number, number];
    readonly detectrun_probation: (a: number) => number;
    readonly detectrun_scores: (a: number) => [number, number];
    readonly detectrun_values: (a: number) => [number, number];
    readonly kernel_weights: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
