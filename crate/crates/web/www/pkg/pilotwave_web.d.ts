/* tslint:disable */
/* eslint-disable */

export function density_grid(sigma: number, d: number, phi: number, t: number, n: number): Float64Array;

export function trajectory_bundle(sigma: number, d: number, phi: number, n: number, seed: number, t_end: number, dt: number): Float64Array;

export function velocity_curve(sigma: number, d: number, phi: number, t: number, x_a: number, n: number): Float64Array;

export function weak_profile(sigma: number, d: number, phi: number, t: number, x_a: number, bins: number, kappa: number, pairs_per_bin: number, seed: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly density_grid: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly trajectory_bundle: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly velocity_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly weak_profile: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
