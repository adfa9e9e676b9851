/* tslint:disable */
/* eslint-disable */

/**
 * Sampled curves sharing one abscissa.
 */
export class Curves {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    count(): number;
    /**
     * One-line summary for display.
     */
    info(): string;
    x(): Float64Array;
    y(k: number): Float64Array;
}

/**
 * Normalized mismatch and parity margin against `λ`; `info` counts verdicts.
 */
export function certificate_scan(family: string, param: number, mu: number, lmin: number, lmax: number, n: number): Curves;

/**
 * `Q` and `Q'` on `[-R, R]`.
 */
export function ground_profile(family: string, param: number, mu: number): Curves;

/**
 * `u = f + g` and `v = f - g` of the solution decaying at `+∞` on
 * `|x| <= 10/√μ`, scaled by `sup max(|u|, |v|)` over `[0, 5/√μ]` as in the
 * certificate records.
 */
export function jost_solution(family: string, param: number, mu: number, lambda: number): Curves;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curves_free: (a: number, b: number) => void;
    readonly certificate_scan: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly curves_count: (a: number) => number;
    readonly curves_info: (a: number) => [number, number];
    readonly curves_x: (a: number) => [number, number];
    readonly curves_y: (a: number, b: number) => [number, number];
    readonly ground_profile: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly jost_solution: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
