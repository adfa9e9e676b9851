/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curves_free: (a: number, b: number) => void;
export const certificate_scan: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const curves_count: (a: number) => number;
export const curves_info: (a: number) => [number, number];
export const curves_x: (a: number) => [number, number];
export const curves_y: (a: number, b: number) => [number, number];
export const ground_profile: (a: number, b: number, c: number, d: number) => [number, number, number];
export const jost_solution: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
