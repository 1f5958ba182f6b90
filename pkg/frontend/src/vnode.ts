/** Minimal virtual-node layer.
 *
 * Views build plain VNode trees; tests snapshot them as strings and the
 * browser layer materializes them with document.createElement. Keeping the
 * tree pure is what makes rendering deterministic and testable without a DOM.
 */

export type Child = VNode | string;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: Child[];
}

export function h(
  tag: string,
  attrs: Record<string, string | number | boolean | undefined> = {},
  ...children: (Child | Child[] | null | undefined)[]
): VNode {
  const cleaned: Record<string, string> = {};
  for (const [key, value] of Object.entries(attrs)) {
    if (value === undefined || value === false) continue;
    cleaned[key] = value === true ? "" : String(value);
  }
  const flat: Child[] = [];
  for (const child of children) {
    if (child === null || child === undefined) continue;
    if (Array.isArray(child)) flat.push(...child);
    else flat.push(child);
  }
  return { tag, attrs: cleaned, children: flat };
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const VOID_TAGS = new Set(["br", "hr", "img", "input", "circle", "line", "polygon", "path"]);

export function renderToString(node: Child): string {
  if (typeof node === "string") return escapeHtml(node);
  const attrs = Object.entries(node.attrs)
    .map(([key, value]) => ` ${key}="${escapeHtml(value)}"`)
    .join("");
  if (VOID_TAGS.has(node.tag) && node.children.length === 0) {
    return `<${node.tag}${attrs}/>`;
  }
  const inner = node.children.map(renderToString).join("");
  return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}
