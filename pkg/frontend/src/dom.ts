/** Browser-only glue: materialize VNode trees into real DOM. No logic here. */

import type { Child, VNode } from "./vnode.js";

const SVG_TAGS = new Set(["svg", "polygon", "line", "circle", "text", "path"]);
const SVG_NS = "http://www.w3.org/2000/svg";

export function toElement(node: VNode): Element {
  const element = SVG_TAGS.has(node.tag)
    ? document.createElementNS(SVG_NS, node.tag)
    : document.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    element.setAttribute(key, value);
  }
  for (const child of node.children) {
    element.append(childToDom(child));
  }
  return element;
}

function childToDom(child: Child): Node {
  return typeof child === "string" ? document.createTextNode(child) : toElement(child);
}

export function mount(root: Element, tree: VNode): void {
  root.replaceChildren(toElement(tree));
}

export function download(filename: string, content: string, type: string): void {
  const blob = new Blob([content], { type });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}
