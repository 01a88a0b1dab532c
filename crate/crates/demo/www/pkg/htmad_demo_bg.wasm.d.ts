/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_detectrun_free: (a: number, b: number) => void;
export const combine_dips: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const detect_synthetic: (a: number, b: number, c: bigint, d: number, e: number) => [number, number, number];
export const detectrun_flags: (a: number) => [number, number];
export const detectrun_likelihoods: (a: number) => [number, number];
export const detectrun_onsets: (a: number) => [number, number];
export const detectrun_probation: (a: number) => number;
export const detectrun_scores: (a: number) => [number, number];
export const detectrun_values: (a: number) => [number, number];
export const kernel_weights: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
