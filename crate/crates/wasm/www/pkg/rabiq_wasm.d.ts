/* tslint:disable */
/* eslint-disable */

export function density_profile(omega: number, big_omega: number, g1_gs: number, g2_tilde_gt: number, chi: number, points: number): string;

export function scan_g1(omega: number, big_omega: number, g2_tilde_gt: number, chi: number, g1_max_gs: number, points: number): string;

export function solve_point(omega: number, big_omega: number, g1_gs: number, g2_tilde_gt: number, chi: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly density_profile: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly scan_g1: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly solve_point: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
